"""Weighted Kabsch alignment of corresponding point sets."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from groundtruth.exceptions import DegenerateGeometry
from groundtruth.geometry import Pose
from groundtruth.timeseries import Trajectory

# Relative size of the second singular value below which the points are collinear
COLLINEAR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Correspondences:
    """Pairs (a_k, b_k) in meters with non-negative weights."""

    points_a: np.ndarray
    points_b: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        a = np.asarray(self.points_a, dtype=float).reshape(-1, 3)
        b = np.asarray(self.points_b, dtype=float).reshape(-1, 3)
        if a.shape != b.shape:
            raise ValueError(f"point sets differ in shape: {a.shape} vs {b.shape}")
        w = np.ones(len(a)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(a),):
            raise ValueError("one weight per correspondence is required")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("correspondence weights must be finite and non-negative")
        if len(a) and not np.any(w > 0.0):
            raise ValueError("correspondence weights are all zero")
        object.__setattr__(self, "points_a", a)
        object.__setattr__(self, "points_b", b)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.points_a)


@dataclass(frozen=True, eq=False)
class RigidAlignment:
    """Transform x -> R x + t taking frame a into frame b."""

    rotation: np.ndarray
    translation: np.ndarray
    rms_residual: float = 0.0
    n_pairs: int = 0
    weighted: bool = False

    @classmethod
    def identity(cls) -> "RigidAlignment":
        return cls(np.eye(3), np.zeros(3))

    def as_pose(self) -> Pose:
        return Pose(self.rotation, self.translation)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def apply(self, trajectory: Trajectory) -> Trajectory:
        return trajectory.transformed(self.rotation, self.translation)


def alignment_cost(R: np.ndarray, t: np.ndarray, c: Correspondences) -> float:
    """Σ w_k ‖R a_k + t − b_k‖²."""
    residual = c.points_a @ R.T + t - c.points_b
    return float(c.weights @ np.sum(residual * residual, axis=1))


def solve_rigid_alignment(c: Correspondences) -> RigidAlignment:
    if len(c) < 3:
        raise DegenerateGeometry(f"rigid alignment needs at least 3 correspondences, got {len(c)}")
    w = c.weights / np.sum(c.weights)
    centroid_a = w @ c.points_a
    centroid_b = w @ c.points_b
    A = c.points_a - centroid_a
    B = c.points_b - centroid_b

    spread = np.linalg.svd(A * np.sqrt(w)[:, None], compute_uv=False)
    if spread[0] == 0.0 or spread[1] <= COLLINEAR_TOL * spread[0]:
        raise DegenerateGeometry("correspondence points are coincident or collinear")

    H = (A * w[:, None]).T @ B
    U, S, Vt = np.linalg.svd(H)
    V = Vt.T
    d = np.sign(np.linalg.det(V @ U.T))
    R = V @ np.diag([1.0, 1.0, d]) @ U.T
    t = centroid_b - R @ centroid_a

    rms = np.sqrt(alignment_cost(R, t, c) / np.sum(c.weights))
    weighted = bool(np.ptp(c.weights) > 0.0)
    return RigidAlignment(R, t, float(rms), len(c), weighted)
