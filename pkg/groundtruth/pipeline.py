"""Orchestration of the ground-truth run: fix filter, time sync, per-epoch pose, IMU clock."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from groundtruth import log
from groundtruth.attitude import EpochError, RotationMethod, estimate_trajectory
from groundtruth.config import PipelineConfig
from groundtruth.exceptions import ConfigInvalidException, DataException, TooFewSamples
from groundtruth.markers import MarkerObservation
from groundtruth.report import CalibrationReport
from groundtruth.timeseries import TimeSeries, Trajectory, _check_time
from groundtruth.timesync import (
    baseline_heading_trace,
    magnetic_heading_trace,
    sync_gnss_pair,
    sync_imu_to_gt,
    sync_mag_to_vg,
)
from groundtruth.utilities import f_exec_time


class GnssFix(str, Enum):
    NO_RTK = "no_rtk"
    FLOAT = "float"
    FIXED = "fixed"


@dataclass(eq=False)
class GnssSeries:
    """One antenna: ENU positions, fix type and per-axis variance (m²) per epoch."""

    t: np.ndarray
    positions: np.ndarray
    fix: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.fix = np.array([GnssFix(f) for f in self.fix], dtype=object)
        self.cov = np.asarray(self.cov, dtype=float).reshape(-1, 3)
        _check_time(self.t)
        n = len(self.t)
        if not (len(self.positions) == len(self.fix) == len(self.cov) == n):
            raise ValueError("GNSS time, position, fix and covariance lengths differ")
        if np.any(self.cov < 0.0):
            raise ValueError("GNSS variances must be non-negative")

    def __len__(self) -> int:
        return len(self.t)

    def as_series(self) -> TimeSeries:
        return TimeSeries(self.t, self.positions)

    def select(self, mask: np.ndarray) -> "GnssSeries":
        return GnssSeries(self.t[mask], self.positions[mask], self.fix[mask], self.cov[mask])

    def shift(self, dt: float) -> "GnssSeries":
        return GnssSeries(self.t + dt, self.positions.copy(), self.fix.copy(), self.cov.copy())

    def accepted(self, fixes: List[str]) -> np.ndarray:
        allowed = {GnssFix(f) for f in fixes}
        return np.array([f in allowed for f in self.fix], dtype=bool)

    def fix_counts(self) -> Dict[str, int]:
        return {f.value: int(sum(1 for x in self.fix if x is f)) for f in GnssFix}

    def weights(self) -> Optional[np.ndarray]:
        """Inverse mean variance per epoch, or None when any variance is zero."""
        mean_var = self.cov.mean(axis=1)
        if not len(mean_var) or np.any(mean_var <= 0.0):
            return None
        return 1.0 / mean_var


@dataclass
class Dataset:
    gnss1: Optional[GnssSeries] = None
    gnss2: Optional[GnssSeries] = None
    mag: Optional[TimeSeries] = None
    imu: Optional[TimeSeries] = None
    markers: List[MarkerObservation] = field(default_factory=list)
    motor_rates: Optional[TimeSeries] = None

    def require(self, *streams: str) -> None:
        missing = [s for s in streams if getattr(self, s) is None or (s == "markers" and not self.markers)]
        if missing:
            raise ConfigInvalidException(f"Missing input stream(s): {', '.join(missing)}")


def solver_options(cfg: PipelineConfig) -> Dict[str, Any]:
    """Configured tolerances in the keyword form each rotation solver expects."""
    tol = cfg.tolerances
    if RotationMethod(cfg.attitude.method) is RotationMethod.TANGENT:
        return {"step_tol": tol.gn_step, "max_iter": tol.gn_max_iter}
    return {"tol": tol.singular}


def filter_fix(gnss: GnssSeries, cfg: PipelineConfig, name: str, report: CalibrationReport) -> GnssSeries:
    for fix, count in gnss.fix_counts().items():
        report.fix_counts[f"{name}.{fix}"] = count
    mask = gnss.accepted(cfg.gnss.accepted_fix)
    kept = gnss.select(mask)
    if len(kept) < 2:
        log.warning(f"{name}: fix filter {cfg.gnss.accepted_fix} rejected {len(gnss) - len(kept)} of {len(gnss)} epochs")
        raise TooFewSamples(f"{name}: {len(kept)} epochs with an accepted fix, need at least 2")
    if len(kept) < len(gnss):
        log.info(f"{name}: fix filter kept {len(kept)} of {len(gnss)} epochs")
    return kept


def _match_epochs(
    t: np.ndarray, series: TimeSeries, max_gap: float, name: str
) -> Tuple[np.ndarray, np.ndarray, List[EpochError]]:
    """Interpolate ``series`` at ``t``; epochs without a sample within ``max_gap`` are rejected."""
    values = series.interpolate(t).reshape(len(t), -1)
    _, gap = series.nearest(t)
    ok = np.all(np.isfinite(values), axis=1) & (gap <= max_gap)
    errors = [
        EpochError(float(t[k]), f"no {name} sample within {max_gap} s", "NoMatchingSample")
        for k in np.flatnonzero(~ok)
    ]
    return values, ok, errors


def synchronize(
    g1: GnssSeries, g2: GnssSeries, mag: TimeSeries, cfg: PipelineConfig, report: CalibrationReport
) -> Tuple[GnssSeries, TimeSeries]:
    """Second antenna and magnetometer moved onto the GNSS 1 clock; offsets go into ``report``."""
    max_lag = cfg.timesync.max_lag
    off_g = sync_gnss_pair(g1.as_series(), g2.as_series(), max_lag)
    report.add_offset("gnss2", off_g)
    g2 = g2.shift(-off_g.delta)

    vg_heading = baseline_heading_trace(g1.as_series(), g2.as_series())
    mag_heading = magnetic_heading_trace(mag, cfg.magnetometer.calibration(), cfg.magnetometer.rotation())
    off_m = sync_mag_to_vg(vg_heading, mag_heading, max_lag)
    report.add_offset("mag", off_m)
    return g2, mag.shift(-off_m.delta)


@f_exec_time
def run_ground_truth(ds: Dataset, cfg: Optional[PipelineConfig] = None) -> Tuple[Trajectory, CalibrationReport]:
    """Ground-truth trajectory T_W_I at the synchronized GNSS epochs and its calibration report."""
    cfg = cfg or PipelineConfig()
    ds.require("gnss1", "gnss2", "mag")
    report = CalibrationReport(config=cfg.to_dict())

    cal = cfg.antenna.calibration()
    wmm = cfg.magnetic.model()
    mag_cal = cfg.magnetometer.calibration()
    R_I_M = cfg.magnetometer.rotation()
    method = RotationMethod(cfg.attitude.method)

    g1 = filter_fix(ds.gnss1, cfg, "gnss1", report)
    g2 = filter_fix(ds.gnss2, cfg, "gnss2", report)
    mag = ds.mag

    if cfg.timesync.enabled:
        g2, mag = synchronize(g1, g2, mag, cfg, report)
    else:
        report.flag("time synchronization disabled")

    t = g1.t
    max_gap = cfg.attitude.max_epoch_gap
    p2, ok2, err2 = _match_epochs(t, g2.as_series(), max_gap, "GNSS 2")
    mags, okm, errm = _match_epochs(t, mag, max_gap, "magnetometer")
    ok = ok2 & okm
    # one record per epoch, GNSS reason first
    unmatched = {e.t: e for e in errm}
    unmatched.update({e.t: e for e in err2})

    weights = g1.weights() if cfg.gnss.weight_by_covariance else None
    estimate = estimate_trajectory(
        t[ok],
        g1.positions[ok],
        p2[ok],
        mags[ok],
        cal,
        wmm,
        method,
        mag_cal=mag_cal,
        R_I_M=R_I_M,
        alpha=cfg.attitude.alpha,
        min_baseline=cfg.attitude.min_baseline,
        weights=None if weights is None else weights[ok],
        max_workers=cfg.workers.max_workers,
        parallel_tol=cfg.tolerances.parallel,
        solver_options=solver_options(cfg),
        unit_tol=cfg.tolerances.unit,
    )
    trajectory = estimate.trajectory
    report.add_residuals(method.value, estimate.residuals)
    report.skipped_epochs = sorted(list(unmatched.values()) + estimate.errors, key=lambda e: e.t)
    report.results["epochs"] = {
        "total": len(t),
        "estimated": len(trajectory),
        "skipped": len(report.skipped_epochs),
    }
    if weights is None and cfg.gnss.weight_by_covariance:
        report.flag("GNSS covariance missing or zero, trajectory is unweighted")
    if len(trajectory) < 2:
        raise TooFewSamples(f"only {len(trajectory)} of {len(t)} epochs could be estimated")

    if cfg.timesync.enabled and cfg.timesync.imu and ds.imu is not None:
        try:
            off_i = sync_imu_to_gt(trajectory, ds.imu, cfg.timesync.max_lag)
        except DataException as err:
            log.warning(f"IMU synchronization failed, trajectory stays on the GNSS clock: {err}")
            report.flag(f"IMU synchronization failed: {err}")
        else:
            report.add_offset("imu", off_i)
            if cfg.timesync.shift_to_imu_clock:
                trajectory = trajectory.shift(off_i.delta)
    elif ds.imu is None:
        report.flag("no IMU stream, trajectory stays on the GNSS clock")

    log.info(
        f"Ground truth: {len(trajectory)} poses, {len(report.skipped_epochs)} skipped epochs, "
        f"method {method.value}"
    )
    return trajectory, report
