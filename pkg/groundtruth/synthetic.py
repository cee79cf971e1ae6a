"""Forward model of a flight and a marker field, used to generate fixtures with known truth."""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from groundtruth import io_handling, log
from groundtruth.attitude import KLAGENFURT, AntennaCalibration, WorldMagneticModel, world_mag_vector
from groundtruth.geometry import Pose, exp_so3, log_so3, rot_x, rot_y, rot_z
from groundtruth.magnetometer import EllipsoidCalibration
from groundtruth.markers import MarkerObservation
from groundtruth.pipeline import Dataset, GnssFix, GnssSeries
from groundtruth.timeseries import TimeSeries, Trajectory
from groundtruth.utilities import ensure_dir_exists

GRAVITY = 9.81
# Clock offsets (s) of GNSS 2, magnetometer and IMU against GNSS 1
DEFAULT_OFFSETS = (0.12, 0.08, 0.05)
DEFAULT_HARD_IRON = (0.1, -0.2, 0.05)
DEFAULT_SOFT_IRON = (1.2, 0.9, 1.0)
# Rate value -> measured RPM from the motor test bench
RPM_CALIBRATION_TABLE = np.array(
    [
        [297.0, 3560.0],
        [486.0, 5605.0],
        [864.0, 9000.0],
        [1242.0, 11800.0],
        [1620.0, 14000.0],
        [1999.0, 15500.0],
    ]
)
# Margin (s) by which the secondary streams outlast the GNSS 1 epochs
STREAM_MARGIN = 1.0


@dataclass
class FlightProfile:
    """Circle with varying speed, heading along the track and small roll/pitch."""

    radius: float = 15.0
    angular_rate: float = 0.25
    rate_variation: float = 0.08
    height: float = 10.0
    climb: float = 2.0
    roll: float = 0.08
    pitch: float = 0.06

    def heading_angle(self, t: np.ndarray) -> np.ndarray:
        return (
            self.angular_rate * t
            + (self.rate_variation / 0.3) * np.sin(0.3 * t)
            + (0.5 * self.rate_variation / 0.71) * np.sin(0.71 * t + 0.4)
        )

    def position(self, t: "np.typing.ArrayLike") -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        theta = self.heading_angle(t)
        return np.column_stack(
            [
                self.radius * np.cos(theta),
                self.radius * np.sin(theta),
                self.height + self.climb * np.sin(0.2 * t),
            ]
        )

    def rotation(self, t: "np.typing.ArrayLike") -> np.ndarray:
        """R_W_I at every time, yaw tangent to the circle."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        yaw = self.heading_angle(t) + np.pi / 2
        roll = self.roll * np.sin(0.7 * t)
        pitch = self.pitch * np.sin(0.9 * t + 1.0)
        return np.array([rot_z(y) @ rot_y(p) @ rot_x(r) for y, p, r in zip(yaw, pitch, roll)])

    def trajectory(self, t: "np.typing.ArrayLike") -> Trajectory:
        return Trajectory(t, self.rotation(t), self.position(t), source="gnss")

    def body_rate(self, t: np.ndarray, h: float = 1e-4) -> np.ndarray:
        Ra = self.rotation(t - h)
        Rb = self.rotation(t + h)
        return np.array([log_so3(a.T @ b) / (2 * h) for a, b in zip(Ra, Rb)])

    def specific_force(self, t: np.ndarray, h: float = 1e-3) -> np.ndarray:
        accel = (self.position(t + h) - 2 * self.position(t) + self.position(t - h)) / (h * h)
        up = accel + np.array([0.0, 0.0, GRAVITY])
        return np.einsum("nji,nj->ni", self.rotation(t), up)


@dataclass
class SyntheticFlight:
    dataset: Dataset
    truth: Trajectory
    offsets: Tuple[float, float, float]
    antenna: AntennaCalibration
    mag_cal: EllipsoidCalibration
    config: Dict[str, Dict] = field(default_factory=dict)


def _lattice(start: float, stop: float, rate: float) -> np.ndarray:
    return start + np.arange(int(np.floor((stop - start) * rate + 1e-9)) + 1) / rate


def simulate_flight(
    duration: float = 60.0,
    gnss_rate: float = 20.0,
    mag_rate: float = 80.0,
    imu_rate: float = 200.0,
    offsets: Sequence[float] = DEFAULT_OFFSETS,
    gnss_noise: float = 0.0,
    mag_noise: float = 0.0,
    hard_iron: Sequence[float] = DEFAULT_HARD_IRON,
    soft_iron: Sequence[float] = DEFAULT_SOFT_IRON,
    antenna: Optional[AntennaCalibration] = None,
    wmm: WorldMagneticModel = KLAGENFURT,
    profile: Optional[FlightProfile] = None,
    degenerate_epochs: Sequence[int] = (),
    seed: int = 0,
) -> SyntheticFlight:
    """Simulate dual GNSS, magnetometer and IMU streams on their own clocks.

    A sensor with offset ``d`` stamps at time ``τ`` what the vehicle did at ``τ - d`` on
    the GNSS 1 clock. ``degenerate_epochs`` are GNSS 1 epoch indices at which the first
    antenna reports the second antenna position (zero baseline). The jumps this puts into
    the GNSS 1 track are meant for runs without time synchronization.
    """
    rng = np.random.default_rng(seed)
    antenna = antenna or AntennaCalibration(
        np.array([-0.4243, 0.4243, 0.0]), np.array([0.4243, -0.4243, 0.0])
    )
    profile = profile or FlightProfile()
    d_g2, d_mag, d_imu = (float(o) for o in offsets)

    def antenna_positions(t: np.ndarray, lever: np.ndarray) -> np.ndarray:
        return profile.position(t) + profile.rotation(t) @ lever

    t1 = _lattice(0.0, duration, gnss_rate)
    p1 = antenna_positions(t1, antenna.p_I_G1)
    t2 = _lattice(-STREAM_MARGIN, duration + STREAM_MARGIN, gnss_rate)
    p2 = antenna_positions(t2 - d_g2, antenna.p_I_G2)
    if gnss_noise > 0.0:
        p1 = p1 + rng.normal(0.0, gnss_noise, p1.shape)
        p2 = p2 + rng.normal(0.0, gnss_noise, p2.shape)
    for k in degenerate_epochs:
        p1[k] = antenna_positions(t1[k:k + 1], antenna.p_I_G2)[0]
    var = np.full((1, 3), max(gnss_noise, 0.0) ** 2)
    gnss1 = GnssSeries(t1, p1, [GnssFix.FIXED] * len(t1), np.repeat(var, len(t1), axis=0))
    gnss2 = GnssSeries(t2, p2, [GnssFix.FIXED] * len(t2), np.repeat(var, len(t2), axis=0))

    S = np.diag(np.asarray(soft_iron, dtype=float))
    h = np.asarray(hard_iron, dtype=float)
    m_w = world_mag_vector(wmm)
    tm = _lattice(-STREAM_MARGIN, duration + STREAM_MARGIN, mag_rate)
    m_body = profile.rotation(tm - d_mag).transpose(0, 2, 1) @ m_w
    if mag_noise > 0.0:
        m_body = m_body + rng.normal(0.0, mag_noise, m_body.shape)
    mag = TimeSeries(tm, m_body @ S.T + h)
    mag_cal = EllipsoidCalibration(h, np.linalg.inv(S))

    ti = _lattice(-STREAM_MARGIN, duration + STREAM_MARGIN, imu_rate)
    imu = TimeSeries(ti, np.hstack([profile.body_rate(ti - d_imu), profile.specific_force(ti - d_imu)]))

    truth = profile.trajectory(t1)
    config = {
        "antenna": {
            "p_I_G1": antenna.p_I_G1.tolist(),
            "p_I_G2": antenna.p_I_G2.tolist(),
        },
        "magnetometer": {
            "offset": h.tolist(),
            "matrix": np.linalg.inv(S).tolist(),
        },
    }
    log.info(f"Simulated {duration:.0f} s flight: {len(t1)} GNSS epochs, offsets {tuple(offsets)}")
    return SyntheticFlight(
        Dataset(gnss1=gnss1, gnss2=gnss2, mag=mag, imu=imu),
        truth,
        (d_g2, d_mag, d_imu),
        antenna,
        mag_cal,
        config,
    )


def ellipsoid_samples(
    n: int = 500,
    hard_iron: Sequence[float] = DEFAULT_HARD_IRON,
    soft_iron: Sequence[float] = DEFAULT_SOFT_IRON,
    noise: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Raw magnetometer samples of a unit field seen from uniformly random directions."""
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    if noise > 0.0:
        u = u * (1.0 + rng.normal(0.0, noise, (n, 1)))
    return u @ np.diag(np.asarray(soft_iron, dtype=float)).T + np.asarray(hard_iron, dtype=float)


def marker_grid(rows: int = 4, cols: int = 5, spacing: float = 0.5) -> Dict[int, Pose]:
    """Planar marker field, row-major ids, marker 0 at the origin."""
    field_poses = {}
    for r in range(rows):
        for c in range(cols):
            yaw = 0.1 * ((r + 2 * c) % 3 - 1)
            field_poses[r * cols + c] = Pose(rot_z(yaw), np.array([c * spacing, r * spacing, 0.0]))
    return field_poses


def marker_observations(
    field_poses: Dict[int, Pose],
    cameras: Sequence[Pose],
    visible_radius: float = 0.8,
    noise: float = 0.0,
    t0: float = 0.0,
    rate: float = 10.0,
    seed: int = 0,
) -> List[MarkerObservation]:
    """Detections T_cam_marker of every marker within ``visible_radius`` (horizontal) of each camera."""
    rng = np.random.default_rng(seed)
    observations = []
    for image_id, T_field_cam in enumerate(cameras):
        for marker_id in sorted(field_poses):
            T_field_marker = field_poses[marker_id]
            offset = T_field_marker.translation[:2] - T_field_cam.translation[:2]
            if np.linalg.norm(offset) > visible_radius:
                continue
            T_cam_marker = T_field_cam.inverse() @ T_field_marker
            if noise > 0.0:
                T_cam_marker = Pose(
                    T_cam_marker.rotation @ exp_so3(rng.normal(0.0, noise, 3)),
                    T_cam_marker.translation + rng.normal(0.0, noise, 3),
                )
            observations.append(MarkerObservation(image_id, marker_id, T_cam_marker, t0 + image_id / rate))
    return observations


def grid_cameras(field_poses: Dict[int, Pose], height: float = 1.5) -> List[Pose]:
    """One downward-looking camera above every marker and every cell centre."""
    points = np.array([p.translation for p in field_poses.values()])
    xs = np.unique(points[:, 0])
    ys = np.unique(points[:, 1])
    down = rot_x(np.pi)
    cameras = [Pose(down, np.array([x, y, height])) for y in ys for x in xs]
    cameras += [
        Pose(down, np.array([0.5 * (xa + xb), 0.5 * (ya + yb), height]))
        for ya, yb in zip(ys[:-1], ys[1:])
        for xa, xb in zip(xs[:-1], xs[1:])
    ]
    return cameras


def vibration_signal(
    freq: float = 100.0,
    sample_rate: float = 900.0,
    duration: float = 20.0,
    amplitude: float = 1.0,
    noise: float = 0.1,
    seed: int = 0,
) -> TimeSeries:
    """IMU stream at rest with a sinusoidal vibration on every accelerometer axis."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(duration * sample_rate)) / sample_rate
    vib = amplitude * np.sin(2 * np.pi * freq * t)
    accel = np.column_stack([vib, 0.5 * vib, GRAVITY + vib]) + rng.normal(0.0, noise, (len(t), 3))
    gyro = rng.normal(0.0, 0.01, (len(t), 3))
    return TimeSeries(t, np.hstack([gyro, accel]))


def write_fixtures(out_dir: str, flight: Optional[SyntheticFlight] = None, seed: int = 0) -> Dict[str, str]:
    """Write a synthetic flight, marker detections and the RPM table as canonical CSV files."""
    ensure_dir_exists(out_dir)
    flight = flight or simulate_flight(seed=seed)
    ds = flight.dataset
    field_poses = marker_grid()
    paths = {
        "gnss1": io_handling.write_gnss(os.path.join(out_dir, "gnss1.csv"), ds.gnss1),
        "gnss2": io_handling.write_gnss(os.path.join(out_dir, "gnss2.csv"), ds.gnss2),
        "mag": io_handling.write_series(os.path.join(out_dir, "mag.csv"), ds.mag, "mag"),
        "imu": io_handling.write_series(os.path.join(out_dir, "imu.csv"), ds.imu, "imu"),
        "truth": io_handling.write_trajectory(os.path.join(out_dir, "truth.csv"), flight.truth),
        "markers": io_handling.write_markers(
            os.path.join(out_dir, "markers.csv"),
            marker_observations(field_poses, grid_cameras(field_poses), noise=0.001, seed=seed),
        ),
        "rpm_table": io_handling.write_table(
            os.path.join(out_dir, "rpm_table.csv"), RPM_CALIBRATION_TABLE, "rpm_table"
        ),
    }
    log.info(f"Wrote {len(paths)} fixture files to {out_dir}")
    return paths
