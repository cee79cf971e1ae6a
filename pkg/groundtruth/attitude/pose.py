"""Per-epoch 6-DoF pose from dual GNSS and magnetometer samples."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import numpy as np

from groundtruth import log
from groundtruth.attitude.solvers import RotationEstimate, RotationMethod, solve_rotation
from groundtruth.attitude.triads import (
    AntennaCalibration,
    WorldMagneticModel,
    build_body_triad,
    build_world_triad,
    world_mag_vector,
)
from groundtruth.exceptions import DataException
from groundtruth.geometry import Pose, compose_position
from groundtruth.gt_globals import DEFAULT_ALPHA, MIN_BASELINE, PARALLEL_TOL, UNIT_TOL
from groundtruth.timeseries import Timestamped, Trajectory

if TYPE_CHECKING:
    from groundtruth.magnetometer.intrinsic import EllipsoidCalibration


@dataclass(frozen=True)
class EpochError:
    """An epoch skipped by the estimator and the reason."""

    t: float
    reason: str
    kind: str


@dataclass
class TrajectoryEstimate:
    trajectory: Trajectory
    residuals: np.ndarray
    iterations: np.ndarray
    errors: List[EpochError] = field(default_factory=list)


def worst_case_heading_error(eta: float, B: float) -> float:
    """Worst-case rotation error (rad) of a dual-antenna baseline B with per-antenna error eta."""
    if B <= 0.0:
        raise ValueError(f"baseline must be positive, got {B}")
    if eta < 0.0:
        raise ValueError(f"antenna accuracy must be non-negative, got {eta}")
    return float(np.arctan(2.0 * eta / B))


def _estimate(
    p_W_G1: np.ndarray,
    p_W_G2: np.ndarray,
    mag: np.ndarray,
    cal: AntennaCalibration,
    m_w: np.ndarray,
    method: "str | RotationMethod",
    mag_cal: Optional["EllipsoidCalibration"],
    R_I_M: Optional[np.ndarray],
    alpha: float,
    min_baseline: float,
    parallel_tol: float = PARALLEL_TOL,
    solver_options: Optional[Dict[str, Any]] = None,
    unit_tol: float = UNIT_TOL,
) -> Tuple[Pose, RotationEstimate]:
    world = build_world_triad(p_W_G1, p_W_G2, m_w, min_baseline, parallel_tol, unit_tol)
    body = build_body_triad(cal, mag, mag_cal, R_I_M, parallel_tol, unit_tol)
    estimate = solve_rotation(world, body, method, alpha, **(solver_options or {}))
    R_W_I = estimate.rotation
    R_W_VG = R_W_I @ cal.R_VG_I.T
    p_W_I = compose_position(p_W_G2, R_W_VG, cal.R_VG_I, cal.p_I_G2)
    return Pose(R_W_I, p_W_I), estimate


def estimate_pose_epoch(
    g1: Timestamped,
    g2: Timestamped,
    mag: "np.typing.ArrayLike",
    cal: AntennaCalibration,
    wmm: WorldMagneticModel,
    method: "str | RotationMethod" = RotationMethod.WAHBA,
    mag_cal: Optional["EllipsoidCalibration"] = None,
    R_I_M: Optional[np.ndarray] = None,
    alpha: float = DEFAULT_ALPHA,
    min_baseline: float = MIN_BASELINE,
) -> Timestamped:
    """Pose T_W_I at the epoch of ``g1``; ``g2`` and ``mag`` must already be aligned to it."""
    pose, _ = _estimate(
        np.asarray(g1.value, dtype=float),
        np.asarray(g2.value, dtype=float),
        np.asarray(mag, dtype=float),
        cal,
        world_mag_vector(wmm),
        method,
        mag_cal,
        R_I_M,
        alpha,
        min_baseline,
    )
    return Timestamped(g1.t, pose)


def estimate_trajectory(
    t: np.ndarray,
    g1_positions: np.ndarray,
    g2_positions: np.ndarray,
    mags: np.ndarray,
    cal: AntennaCalibration,
    wmm: WorldMagneticModel,
    method: "str | RotationMethod" = RotationMethod.WAHBA,
    mag_cal: Optional["EllipsoidCalibration"] = None,
    R_I_M: Optional[np.ndarray] = None,
    alpha: float = DEFAULT_ALPHA,
    min_baseline: float = MIN_BASELINE,
    weights: Optional[np.ndarray] = None,
    max_workers: int = 4,
    parallel_tol: float = PARALLEL_TOL,
    solver_options: Optional[Dict[str, Any]] = None,
    unit_tol: float = UNIT_TOL,
) -> TrajectoryEstimate:
    """Estimate every epoch in a thread pool; degenerate epochs become ``EpochError`` records.

    ``solver_options`` are passed to the rotation solver of ``method``.
    """
    m_w = world_mag_vector(wmm)

    def worker(k: int):
        try:
            return _estimate(
                g1_positions[k], g2_positions[k], mags[k], cal, m_w,
                method, mag_cal, R_I_M, alpha, min_baseline, parallel_tol, solver_options, unit_tol,
            )
        except (DataException, ValueError) as err:
            return EpochError(float(t[k]), str(err), type(err).__name__)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(worker, range(len(t))))

    keep: List[int] = []
    poses: List[Pose] = []
    residuals: List[float] = []
    iterations: List[int] = []
    errors: List[EpochError] = []
    for k, result in enumerate(results):
        if isinstance(result, EpochError):
            log.warning(f"Skipping epoch t={result.t:.3f}: {result.kind}: {result.reason}")
            errors.append(result)
            continue
        pose, estimate = result
        keep.append(k)
        poses.append(pose)
        residuals.append(estimate.residual)
        iterations.append(estimate.iterations)

    idx = np.array(keep, dtype=int)
    trajectory = Trajectory.from_poses(
        np.asarray(t, dtype=float)[idx],
        poses,
        weights=None if weights is None else np.asarray(weights)[idx],
        source="gnss",
    )
    log.info(f"Estimated {len(poses)} of {len(t)} epochs ({len(errors)} skipped)")
    return TrajectoryEstimate(trajectory, np.array(residuals), np.array(iterations, dtype=int), errors)
