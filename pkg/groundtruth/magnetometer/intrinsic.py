"""Hard-iron and soft-iron magnetometer calibration by algebraic ellipsoid fitting."""

from dataclasses import dataclass, field

import numpy as np

from groundtruth import log
from groundtruth.exceptions import DegenerateFit
from groundtruth.geometry import as_vec3
from groundtruth.gt_globals import MAX_COVERAGE_DEFICIENCY

MIN_SAMPLES = 10
# Relative size of the second smallest singular value of the design matrix
NULLSPACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EllipsoidCalibration:
    """m_corr = matrix · (m_raw − offset)."""

    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    matrix: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "offset", as_vec3(self.offset, "offset"))
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (3, 3) or not np.all(np.isfinite(mat)):
            raise ValueError("soft-iron matrix must be a finite 3x3 matrix")
        if abs(np.linalg.det(mat)) < 1e-15:
            raise ValueError("soft-iron matrix is singular")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls) -> "EllipsoidCalibration":
        return cls(np.zeros(3), np.eye(3))

    def correct(self, m_raw: "np.typing.ArrayLike") -> np.ndarray:
        return self.matrix @ (as_vec3(m_raw, "magnetometer sample") - self.offset)

    def correct_many(self, samples: "np.typing.ArrayLike") -> np.ndarray:
        return (np.asarray(samples, dtype=float).reshape(-1, 3) - self.offset) @ self.matrix.T


def correct_sample(m_raw: "np.typing.ArrayLike", cal: EllipsoidCalibration) -> np.ndarray:
    return cal.correct(m_raw)


def correct_samples(samples: "np.typing.ArrayLike", cal: EllipsoidCalibration) -> np.ndarray:
    return cal.correct_many(samples)


def sphere_coverage_deficiency(samples: "np.typing.ArrayLike") -> float:
    """1 − λmin/λmax of the scatter of centred unit directions.

    0 for uniform sphere coverage, 1 for samples on a plane or a great circle.
    """
    X = np.asarray(samples, dtype=float).reshape(-1, 3)
    centred = X - X.mean(axis=0)
    norms = np.linalg.norm(centred, axis=1)
    u = centred[norms > 0.0] / norms[norms > 0.0, None]
    if len(u) < 3:
        return 1.0
    eig = np.linalg.eigvalsh(u.T @ u / len(u))
    return float(1.0 - max(eig[0], 0.0) / eig[-1])


def _sym_sqrt(Q: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(Q)
    return vecs @ np.diag(np.sqrt(vals)) @ vecs.T


def fit_ellipsoid(
    samples: "np.typing.ArrayLike", max_deficiency: float = MAX_COVERAGE_DEFICIENCY
) -> EllipsoidCalibration:
    """Fit xᵀQx + 2qᵀx + k = 0 and return the sphere-restoring calibration.

    The soft-iron matrix is the symmetric positive definite square root of the normalized
    quadric, scaled so the corrected samples have unit RMS norm.
    """
    X = np.asarray(samples, dtype=float).reshape(-1, 3)
    if len(X) < MIN_SAMPLES:
        raise DegenerateFit(f"ellipsoid fit needs at least {MIN_SAMPLES} samples, got {len(X)}")
    deficiency = sphere_coverage_deficiency(X)
    if deficiency > max_deficiency:
        raise DegenerateFit(f"samples do not cover the sphere (coverage deficiency {deficiency:.3f})")

    # normalized coordinates keep the design matrix well conditioned
    mu = X.mean(axis=0)
    scale = float(np.sqrt(np.mean(np.sum((X - mu) ** 2, axis=1))))
    Y = (X - mu) / scale
    x, y, z = Y[:, 0], Y[:, 1], Y[:, 2]
    D = np.column_stack(
        [x * x, y * y, z * z, 2 * x * y, 2 * x * z, 2 * y * z, 2 * x, 2 * y, 2 * z, np.ones(len(Y))]
    )
    _, S, Vt = np.linalg.svd(D, full_matrices=False)
    if S[-2] <= NULLSPACE_TOL * S[0]:
        raise DegenerateFit("quadric is not unique, samples are too close to a degenerate surface")
    v = Vt[-1]

    Q = np.array([[v[0], v[3], v[4]], [v[3], v[1], v[5]], [v[4], v[5], v[2]]])
    q = v[6:9]
    k = v[9]
    eig = np.linalg.eigvalsh(Q)
    if eig[-1] < 0.0:
        Q, q, k = -Q, -q, -k
        eig = -eig[::-1]
    if eig[0] <= 0.0:
        raise DegenerateFit("fitted quadric is not an ellipsoid")

    center = -np.linalg.solve(Q, q)
    radius2 = float(center @ Q @ center - k)
    if radius2 <= 0.0:
        raise DegenerateFit("fitted quadric is an imaginary ellipsoid")

    T = _sym_sqrt(Q / radius2) / scale
    offset = mu + scale * center
    corrected = (X - offset) @ T.T
    rms = float(np.sqrt(np.mean(np.sum(corrected * corrected, axis=1))))
    T = T / rms

    log.info(f"Ellipsoid fit on {len(X)} samples: offset {np.round(offset, 6).tolist()}")
    return EllipsoidCalibration(offset, T)
