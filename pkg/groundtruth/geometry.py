"""3-D linear algebra and SO(3) machinery shared by every module.

Rotations are plain ``(3, 3)`` numpy arrays, tangent vectors and points are ``(3,)`` arrays.
``R_A_B`` is the rotation of frame B expressed in frame A, so ``p_A = R_A_B @ p_B``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from groundtruth import log
from groundtruth.exceptions import SingularSystem
from groundtruth.gt_globals import MEDIAN_TOL, ROTATION_TOL, SINGULAR_TOL, UNIT_TOL

# Below this angle exp/log switch to their series expansions
SMALL_ANGLE = 1e-8
# Within this distance of pi, log uses the symmetric-part axis extraction
NEAR_PI = 1e-3


def as_vec3(v: "np.typing.ArrayLike", name: str = "vector") -> np.ndarray:
    """Return ``v`` as a finite float ``(3,)`` array."""
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components: {arr}")
    return arr


def as_rotation(R: "np.typing.ArrayLike", tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate a rotation matrix: RᵀR = I and det(R) = 1 within ``tol``."""
    mat = np.asarray(R, dtype=float)
    if mat.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("rotation has non-finite entries")
    if np.max(np.abs(mat.T @ mat - np.eye(3))) > tol or abs(np.linalg.det(mat) - 1.0) > tol:
        raise ValueError("matrix is not a rotation (orthonormality/determinant check failed)")
    return mat


def normalize(v: "np.typing.ArrayLike", tol: float = UNIT_TOL) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    norm = np.linalg.norm(arr)
    if norm <= tol or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return arr / norm


def skew(v: "np.typing.ArrayLike") -> np.ndarray:
    """Skew-symmetric matrix with ``skew(v) @ w == np.cross(v, w)``."""
    x, y, z = as_vec3(v)
    return np.array(
        [
            [0.0, -z, y],
            [z, 0.0, -x],
            [-y, x, 0.0],
        ]
    )


def unskew(M: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` (uses the antisymmetric part of ``M``)."""
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


def exp_so3(omega: "np.typing.ArrayLike") -> np.ndarray:
    """Rodrigues formula, tangent vector -> rotation matrix."""
    w = as_vec3(omega, "tangent vector")
    theta = np.linalg.norm(w)
    W = skew(w)
    if theta < SMALL_ANGLE:
        return np.eye(3) + W + 0.5 * W @ W
    K = W / theta
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * K @ K


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation matrix -> tangent vector with norm in [0, pi]."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {R.shape}")
    cos_theta = np.clip(0.5 * (np.trace(R) - 1.0), -1.0, 1.0)
    theta = np.arccos(cos_theta)
    antisym = 2.0 * unskew(R)  # = 2 sin(theta) axis

    if theta < SMALL_ANGLE:
        return 0.5 * antisym * (1.0 + theta * theta / 6.0)

    if np.pi - theta < NEAR_PI:
        # axis from the symmetric part: (R + Rᵀ)/2 = cos I + (1 - cos) a aᵀ
        B = (0.5 * (R + R.T) - cos_theta * np.eye(3)) / (1.0 - cos_theta)
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / np.sqrt(max(B[k, k], 0.0))
        axis = axis / np.linalg.norm(axis)
        if np.dot(axis, antisym) < 0.0:
            axis = -axis
        return theta * axis

    return theta / (2.0 * np.sin(theta)) * antisym


def project_to_so3(M: "np.typing.ArrayLike", tol: float = SINGULAR_TOL) -> np.ndarray:
    """Nearest rotation in Frobenius norm, U·diag(1, 1, det(U)det(V))·Vᵀ."""
    mat = np.asarray(M, dtype=float)
    if mat.shape != (3, 3):
        raise ValueError(f"matrix must be 3x3, got shape {mat.shape}")
    U, S, Vt = np.linalg.svd(mat)
    if S[-1] < tol:
        raise SingularSystem(
            f"cannot project a degenerate matrix onto SO(3) (smallest singular value {S[-1]:.3e})"
        )
    D = np.diag([1.0, 1.0, np.linalg.det(U) * np.linalg.det(Vt)])
    return U @ D @ Vt


def geodesic_distance(R1: np.ndarray, R2: np.ndarray) -> float:
    """Angle of the relative rotation R1ᵀR2 in radians."""
    return float(np.linalg.norm(log_so3(np.asarray(R1).T @ np.asarray(R2))))


def compose_position(
    p_W_G2: "np.typing.ArrayLike",
    R_W_VG: np.ndarray,
    R_VG_I: np.ndarray,
    p_I_G2: "np.typing.ArrayLike",
) -> np.ndarray:
    """IMU position in the world frame, p_WI = p_W_G2 + R_W_VG·R_VG_I·(−p_I_G2)."""
    return as_vec3(p_W_G2, "p_W_G2") + R_W_VG @ R_VG_I @ (-as_vec3(p_I_G2, "p_I_G2"))


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_to_quaternion(R: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (qw, qx, qy, qz) with qw >= 0."""
    x, y, z, w = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat()
    q = np.array([w, x, y, z])
    if q[0] < 0.0:
        q = -q
    return q


def quaternion_to_rotation(q: "np.typing.ArrayLike") -> np.ndarray:
    """Quaternion (qw, qx, qy, qz) -> rotation matrix. The quaternion is normalized first."""
    w, x, y, z = np.asarray(q, dtype=float).reshape(4)
    return Rotation.from_quat([x, y, z, w]).as_matrix()


def chordal_mean(rotations: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Projection of the (weighted) sum of rotation matrices onto SO(3)."""
    stack = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    if weights is None:
        weights = np.ones(len(stack))
    return project_to_so3(np.tensordot(np.asarray(weights, dtype=float), stack, axes=1))


def geometric_median(
    points: "np.typing.ArrayLike",
    weights: Optional["np.typing.ArrayLike"] = None,
    tol: float = MEDIAN_TOL,
    max_iter: int = 1000,
) -> np.ndarray:
    """Weiszfeld iteration for the point minimizing the summed Euclidean distance.

    Starts at the coordinate-wise median. When the iterate lands on a data point the
    subgradient condition decides whether that point is the median, otherwise the
    Vardi-Zhang step moves off it.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("geometric_median expects a non-empty (N, d) array")
    w = np.ones(len(pts)) if weights is None else np.asarray(weights, dtype=float)
    if len(pts) == 1:
        return pts[0].copy()

    scale = max(1.0, float(np.max(np.abs(pts))))
    x = np.median(pts, axis=0)
    for _ in range(max_iter):
        diff = pts - x
        dist = np.linalg.norm(diff, axis=1)
        coincide = dist <= 1e-14 * scale
        far = ~coincide
        inv = w[far] / dist[far]
        if not np.any(far):
            return x
        T = inv @ pts[far] / np.sum(inv)
        if np.any(coincide):
            w0 = float(np.sum(w[coincide]))
            pull = inv @ diff[far]
            r = float(np.linalg.norm(pull))
            if r <= w0:
                return x
            x_new = max(0.0, 1.0 - w0 / r) * T + min(1.0, w0 / r) * x
        else:
            x_new = T
        if np.linalg.norm(x_new - x) < tol:
            return x_new
        x = x_new
    log.debug(f"geometric_median: no convergence after {max_iter} iterations")
    return x


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform T_A_B: rotation R_A_B and translation p_AB (meters)."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", as_vec3(self.translation, "translation"))
        if self.rotation.shape != (3, 3):
            raise ValueError("pose rotation must be 3x3")

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_quaternion(cls, q: "np.typing.ArrayLike", t: "np.typing.ArrayLike") -> "Pose":
        return cls(quaternion_to_rotation(q), np.asarray(t, dtype=float))

    def __matmul__(self, other: "Pose") -> "Pose":
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "Pose":
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def transform(self, points: "np.typing.ArrayLike") -> np.ndarray:
        """Map points (``(3,)`` or ``(N, 3)``) from frame B into frame A."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def quaternion(self) -> np.ndarray:
        return rotation_to_quaternion(self.rotation)

    def __repr__(self) -> str:
        q = np.round(self.quaternion(), 6)
        t = np.round(self.translation, 6)
        return f"Pose(q={q.tolist()}, t={t.tolist()})"
