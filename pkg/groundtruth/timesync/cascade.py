"""The three synchronization stages: GNSS to GNSS, magnetometer to the virtual GNSS vector,
IMU gyro to the rotational ground truth."""

from typing import TYPE_CHECKING, Optional

import numpy as np

from groundtruth import log
from groundtruth.exceptions import TooFewSamples
from groundtruth.geometry import log_so3
from groundtruth.gt_globals import MAX_LAG
from groundtruth.timeseries import TimeSeries, Trajectory
from groundtruth.timesync.xcorr import SignalTrace, TimeOffset, differentiate, estimate_offset_xcorr

if TYPE_CHECKING:
    from groundtruth.magnetometer.intrinsic import EllipsoidCalibration

MIN_SYNC_DURATION = 1.0


def speed_trace(positions: TimeSeries) -> SignalTrace:
    velocity = differentiate(positions)
    return SignalTrace(velocity.t, np.linalg.norm(velocity.values.reshape(len(velocity), -1), axis=1))


def baseline_heading_trace(g1: TimeSeries, g2: TimeSeries) -> SignalTrace:
    """Unwrapped yaw of the horizontal projection of G1 - G2, sampled at the G1 epochs."""
    p2 = g2.interpolate(g1.t)
    valid = np.all(np.isfinite(p2), axis=1)
    baseline = g1.values[valid] - p2[valid]
    heading = np.unwrap(np.arctan2(baseline[:, 1], baseline[:, 0]))
    return SignalTrace(g1.t[valid], heading)


def magnetic_heading_trace(
    mag: TimeSeries,
    mag_cal: Optional["EllipsoidCalibration"] = None,
    R_I_M: Optional[np.ndarray] = None,
) -> SignalTrace:
    """Unwrapped yaw seen by the magnetometer.

    The horizontal field direction rotates against the vehicle, so the negated angle of the
    corrected sample increases with vehicle yaw like the baseline heading does.
    """
    m = mag.values
    if mag_cal is not None:
        m = mag_cal.correct_many(m)
    if R_I_M is not None:
        m = m @ np.asarray(R_I_M).T
    return SignalTrace(mag.t, np.unwrap(-np.arctan2(m[:, 1], m[:, 0])))


def angular_rate_trace(rotations: "TimeSeries | Trajectory") -> SignalTrace:
    """Body rate norm ‖log(R_kᵀ R_k+1)‖ / Δt at the midpoint of each interval."""
    t = rotations.t
    R = rotations.rotations if isinstance(rotations, Trajectory) else rotations.values
    if len(t) < 2:
        raise TooFewSamples("angular rate needs at least 2 rotations")
    rel = np.einsum("nji,njk->nik", R[:-1], R[1:])
    angles = np.array([np.linalg.norm(log_so3(Rk)) for Rk in rel])
    dt = np.diff(t)
    return SignalTrace(0.5 * (t[:-1] + t[1:]), angles / dt)


def _check_duration(series: TimeSeries, name: str) -> None:
    if len(series) < 2 or series.duration < MIN_SYNC_DURATION:
        raise TooFewSamples(f"{name} covers {series.duration:.3f} s, need at least {MIN_SYNC_DURATION} s")


def sync_gnss_pair(g1: TimeSeries, g2: TimeSeries, max_lag: float = MAX_LAG) -> TimeOffset:
    """Offset of the second antenna against the first from their speed profiles."""
    _check_duration(g1, "GNSS 1")
    _check_duration(g2, "GNSS 2")
    offset = estimate_offset_xcorr(speed_trace(g1), speed_trace(g2), max_lag)
    log.info(f"GNSS pair offset {offset.delta:+.4f} s (correlation {offset.peak_correlation:.3f})")
    return offset


def sync_mag_to_vg(
    vg_heading: SignalTrace, mag_heading: SignalTrace, max_lag: float = MAX_LAG
) -> TimeOffset:
    """Offset of the magnetometer against the virtual GNSS vector from heading rates."""
    a = differentiate(TimeSeries(vg_heading.t, vg_heading.v))
    b = differentiate(TimeSeries(mag_heading.t, mag_heading.v))
    offset = estimate_offset_xcorr(SignalTrace(a.t, a.values), SignalTrace(b.t, b.values), max_lag)
    log.info(f"Magnetometer offset {offset.delta:+.4f} s (correlation {offset.peak_correlation:.3f})")
    return offset


def sync_imu_to_gt(
    gt_rotations: "TimeSeries | Trajectory", imu_gyro: TimeSeries, max_lag: float = MAX_LAG
) -> TimeOffset:
    """Offset of the IMU against the ground truth from angular rate norms."""
    gt_rate = angular_rate_trace(gt_rotations)
    gyro = SignalTrace(imu_gyro.t, np.linalg.norm(imu_gyro.values[:, :3], axis=1))
    offset = estimate_offset_xcorr(gt_rate, gyro, max_lag)
    log.info(f"IMU offset {offset.delta:+.4f} s (correlation {offset.peak_correlation:.3f})")
    return offset
