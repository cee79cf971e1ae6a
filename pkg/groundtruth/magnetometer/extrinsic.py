"""Magnetometer-to-IMU rotation and field inclination from static vehicle orientations.

For every static pose the gravity direction g_k (IMU frame, pointing down) and the
corrected field direction m_k (magnetometer frame) must satisfy g_kᵀ R_I_M m_k = sin(I).
The rotation and the inclination are estimated jointly on that residual.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.transform import Rotation

from groundtruth import log
from groundtruth.attitude.solvers import wahba_svd
from groundtruth.exceptions import DataException, IllConditioned, NonConvergence, TooFewSamples
from groundtruth.geometry import exp_so3, normalize
from groundtruth.gt_globals import GN_MAX_ITER, GN_STEP_TOL, MAX_GRAVITY_CONDITION, UNIT_TOL
from groundtruth.magnetometer.intrinsic import EllipsoidCalibration
from groundtruth.timeseries import TimeSeries

MIN_POSES = 3
STATIC_GYRO_THRESHOLD = 0.02
STATIC_MIN_DURATION = 1.0


@dataclass(frozen=True, eq=False)
class StaticOrientationSet:
    """Per static pose: unit gravity direction (IMU frame) and unit field direction (mag frame)."""

    gravity: np.ndarray
    mag: np.ndarray

    def __post_init__(self) -> None:
        g = np.asarray(self.gravity, dtype=float).reshape(-1, 3)
        m = np.asarray(self.mag, dtype=float).reshape(-1, 3)
        if g.shape != m.shape:
            raise ValueError("gravity and magnetic direction lists differ in length")
        object.__setattr__(self, "gravity", g / np.linalg.norm(g, axis=1, keepdims=True))
        object.__setattr__(self, "mag", m / np.linalg.norm(m, axis=1, keepdims=True))

    def __len__(self) -> int:
        return len(self.gravity)

    def condition(self) -> float:
        return float(np.linalg.cond(self.gravity))


@dataclass(frozen=True, eq=False)
class MagExtrinsics:
    R_I_M: np.ndarray
    inclination: float
    residual: float = 0.0
    iterations: int = 0


def extrinsic_residual(R: np.ndarray, inclination: float, data: StaticOrientationSet) -> np.ndarray:
    return np.einsum("ni,ni->n", data.gravity, data.mag @ R.T) - np.sin(inclination)


def _jacobian(R: np.ndarray, inclination: float, data: StaticOrientationSet) -> np.ndarray:
    # left perturbation R <- exp(δ) R
    rotated = data.mag @ R.T
    return np.column_stack([np.cross(rotated, data.gravity), np.full(len(data), -np.cos(inclination))])


def _wrap_inclination(inclination: float) -> float:
    return float(np.arcsin(np.clip(np.sin(inclination), -1.0, 1.0)))


def _gauss_newton(
    R: np.ndarray, data: StaticOrientationSet, step_tol: float, max_iter: int
) -> Tuple[np.ndarray, float, float, int]:
    incl = float(np.arcsin(np.clip(np.mean(extrinsic_residual(R, 0.0, data)), -1.0, 1.0)))
    r = extrinsic_residual(R, incl, data)
    cost = float(r @ r)
    for iteration in range(max_iter):
        delta = np.linalg.lstsq(_jacobian(R, incl, data), -r, rcond=None)[0]
        step = float(np.linalg.norm(delta))
        if step < step_tol:
            return R, incl, cost, iteration
        scale = 1.0
        while True:
            R_new = exp_so3(scale * delta[:3]) @ R
            incl_new = incl + scale * delta[3]
            r_new = extrinsic_residual(R_new, incl_new, data)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                break
            scale *= 0.5
            if scale * step < step_tol:
                return R, incl, cost, iteration
        R, incl, r, cost = R_new, incl_new, r_new, cost_new
        if scale * step < step_tol:
            return R, incl, cost, iteration + 1
    raise NonConvergence(
        f"extrinsic Gauss-Newton did not converge in {max_iter} iterations", residual=float(np.sqrt(cost))
    )


def _least_squares_fallback(R0: np.ndarray, data: StaticOrientationSet) -> Tuple[np.ndarray, float, float, int]:
    incl0 = float(np.arcsin(np.clip(np.mean(extrinsic_residual(R0, 0.0, data)), -1.0, 1.0)))

    def fun(x: np.ndarray) -> np.ndarray:
        return extrinsic_residual(exp_so3(x[:3]) @ R0, x[3], data)

    result = least_squares(fun, np.array([0.0, 0.0, 0.0, incl0]), method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    R = exp_so3(result.x[:3]) @ R0
    return R, float(result.x[3]), float(2.0 * result.cost), int(result.nfev)


def _initial_rotations(data: StaticOrientationSet) -> List[np.ndarray]:
    starts: List[np.ndarray] = []
    try:
        starts.append(wahba_svd(data.gravity, data.mag))
    except DataException:
        log.debug("Wahba initialization on (g, m) pairs is degenerate, using axis-aligned starts only")
    starts.extend(Rotation.create_group("O").as_matrix())
    return starts


def estimate_extrinsics(
    data: StaticOrientationSet,
    max_condition: float = MAX_GRAVITY_CONDITION,
    step_tol: float = GN_STEP_TOL,
    max_iter: int = GN_MAX_ITER,
) -> MagExtrinsics:
    """Joint estimate of R_I_M and the inclination, best of several starting rotations."""
    if len(data) < MIN_POSES:
        raise IllConditioned(f"extrinsic calibration needs at least {MIN_POSES} static poses, got {len(data)}")
    cond = data.condition()
    if not np.isfinite(cond) or cond >= max_condition:
        raise IllConditioned(f"static gravity directions do not span 3-D (condition number {cond:.3e})")

    best: Optional[Tuple[np.ndarray, float, float, int]] = None
    failures = 0
    for R0 in _initial_rotations(data):
        try:
            candidate = _gauss_newton(R0, data, step_tol, max_iter)
        except NonConvergence as err:
            log.debug(f"extrinsic Gauss-Newton: {err}, falling back to least_squares")
            failures += 1
            candidate = _least_squares_fallback(R0, data)
        if best is None or candidate[2] < best[2]:
            best = candidate

    assert best is not None
    R, incl, cost, iterations = best
    incl = _wrap_inclination(incl)
    residual = float(np.sqrt(np.mean(extrinsic_residual(R, incl, data) ** 2)))
    log.info(
        f"Magnetometer extrinsics: inclination {np.degrees(incl):.4f} deg, rms residual {residual:.3e}"
        f" ({failures} fallback start(s))"
    )
    return MagExtrinsics(R, incl, residual, iterations)


def detect_static_windows(
    imu: TimeSeries,
    gyro_threshold: float = STATIC_GYRO_THRESHOLD,
    min_duration: float = STATIC_MIN_DURATION,
) -> List[Tuple[int, int]]:
    """Index ranges [start, stop) where the gyro norm stays below the threshold long enough."""
    still = np.linalg.norm(imu.values[:, :3], axis=1) < gyro_threshold
    edges = np.diff(np.concatenate([[0], still.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return [
        (int(a), int(b))
        for a, b in zip(starts, stops)
        if imu.t[b - 1] - imu.t[a] >= min_duration
    ]


def build_static_orientation_set(
    imu: TimeSeries,
    mag: TimeSeries,
    mag_cal: Optional[EllipsoidCalibration] = None,
    gyro_threshold: float = STATIC_GYRO_THRESHOLD,
    min_duration: float = STATIC_MIN_DURATION,
    unit_tol: float = UNIT_TOL,
) -> StaticOrientationSet:
    """Mean gravity and field direction for every static window in the IMU stream."""
    mag_cal = mag_cal or EllipsoidCalibration.identity()
    gravity: List[np.ndarray] = []
    field: List[np.ndarray] = []
    for start, stop in detect_static_windows(imu, gyro_threshold, min_duration):
        t0, t1 = imu.t[start], imu.t[stop - 1]
        window = mag.window(t0, t1)
        if not len(window):
            log.warning(f"static window [{t0:.2f}, {t1:.2f}] s has no magnetometer samples")
            continue
        # specific force points up at rest
        gravity.append(-normalize(imu.values[start:stop, 3:6].mean(axis=0), unit_tol))
        field.append(normalize(mag_cal.correct_many(window.values).mean(axis=0), unit_tol))
    if not gravity:
        raise TooFewSamples("no static windows found in the IMU stream")
    log.info(f"Found {len(gravity)} static orientation(s)")
    return StaticOrientationSet(np.array(gravity), np.array(field))
