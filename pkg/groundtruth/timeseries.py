"""Timestamped containers: generic sample series and pose trajectories."""

from dataclasses import dataclass
from typing import Generic, Optional, Tuple, TypeVar

import numpy as np

from groundtruth.exceptions import NonMonotonicTime
from groundtruth.geometry import Pose

T = TypeVar("T")


@dataclass(frozen=True)
class Timestamped(Generic[T]):
    t: float
    value: T

    def __post_init__(self) -> None:
        if not np.isfinite(self.t):
            raise ValueError(f"timestamp must be finite, got {self.t}")


def _check_time(t: np.ndarray) -> None:
    if t.ndim != 1:
        raise ValueError("time axis must be one-dimensional")
    if not np.all(np.isfinite(t)):
        raise ValueError("time axis has non-finite entries")
    steps = np.diff(t)
    if np.any(steps <= 0.0):
        k = int(np.argmax(steps <= 0.0)) + 1
        raise NonMonotonicTime(f"timestamps not strictly increasing at sample {k}", line=None)


class TimeSeries:
    """Strictly increasing timestamps ``t`` with samples ``values`` (first axis is time)."""

    def __init__(self, t: "np.typing.ArrayLike", values: "np.typing.ArrayLike") -> None:
        self.t = np.asarray(t, dtype=float)
        self.values = np.asarray(values, dtype=float)
        _check_time(self.t)
        if len(self.values) != len(self.t):
            raise ValueError(
                f"time axis has {len(self.t)} samples but values have {len(self.values)}"
            )

    def __len__(self) -> int:
        return len(self.t)

    def __repr__(self) -> str:
        if not len(self):
            return "TimeSeries(empty)"
        return f"TimeSeries(n={len(self)}, t=[{self.t[0]:.3f}, {self.t[-1]:.3f}])"

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self) > 1 else 0.0

    @property
    def rate(self) -> float:
        """Native sample rate estimated from the median step."""
        if len(self) < 2:
            return 0.0
        return 1.0 / float(np.median(np.diff(self.t)))

    def shift(self, dt: float) -> "TimeSeries":
        return TimeSeries(self.t + dt, self.values.copy())

    def select(self, mask: np.ndarray) -> "TimeSeries":
        return TimeSeries(self.t[mask], self.values[mask])

    def window(self, t0: float, t1: float) -> "TimeSeries":
        return self.select((self.t >= t0) & (self.t <= t1))

    def interpolate(self, t_query: "np.typing.ArrayLike") -> np.ndarray:
        """Linear interpolation per channel; queries outside the time span give NaN."""
        tq = np.asarray(t_query, dtype=float)
        flat = self.values.reshape(len(self), -1)
        out = np.column_stack(
            [np.interp(tq, self.t, flat[:, k], left=np.nan, right=np.nan) for k in range(flat.shape[1])]
        )
        return out.reshape(tq.shape + self.values.shape[1:])

    def nearest(self, t_query: "np.typing.ArrayLike") -> Tuple[np.ndarray, np.ndarray]:
        """Index of the nearest sample and the absolute time gap for each query time."""
        tq = np.atleast_1d(np.asarray(t_query, dtype=float))
        right = np.clip(np.searchsorted(self.t, tq), 0, len(self) - 1)
        left = np.clip(right - 1, 0, len(self) - 1)
        pick_left = np.abs(tq - self.t[left]) <= np.abs(self.t[right] - tq)
        idx = np.where(pick_left, left, right)
        return idx, np.abs(self.t[idx] - tq)


class Trajectory:
    """Pose series ``T_W_I(t)`` with optional per-sample weights and a source label.

    ``source`` names the producing system (``gnss``, ``marker`` or ``mocap``) and drives
    the stitching priority.
    """

    def __init__(
        self,
        t: "np.typing.ArrayLike",
        rotations: "np.typing.ArrayLike",
        positions: "np.typing.ArrayLike",
        weights: Optional["np.typing.ArrayLike"] = None,
        source: str = "gnss",
    ) -> None:
        self.t = np.asarray(t, dtype=float)
        self.rotations = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        self.source = source
        _check_time(self.t)
        n = len(self.t)
        if len(self.rotations) != n or len(self.positions) != n:
            raise ValueError("trajectory time, rotation and position lengths differ")
        if self.weights is not None and len(self.weights) != n:
            raise ValueError("trajectory weights length differs from time axis")

    def __len__(self) -> int:
        return len(self.t)

    def __repr__(self) -> str:
        return f"Trajectory(source={self.source!r}, n={len(self)})"

    @classmethod
    def from_poses(cls, t, poses, weights=None, source: str = "gnss") -> "Trajectory":
        rotations = np.array([p.rotation for p in poses]).reshape(-1, 3, 3)
        positions = np.array([p.translation for p in poses]).reshape(-1, 3)
        return cls(t, rotations, positions, weights=weights, source=source)

    def pose(self, k: int) -> Pose:
        return Pose(self.rotations[k], self.positions[k])

    def poses(self):
        return [self.pose(k) for k in range(len(self))]

    def position_series(self) -> TimeSeries:
        return TimeSeries(self.t, self.positions)

    def rotation_series(self) -> TimeSeries:
        return TimeSeries(self.t, self.rotations)

    def select(self, mask: np.ndarray) -> "Trajectory":
        weights = None if self.weights is None else self.weights[mask]
        return Trajectory(
            self.t[mask], self.rotations[mask], self.positions[mask], weights, self.source
        )

    def window(self, t0: float, t1: float) -> "Trajectory":
        return self.select((self.t >= t0) & (self.t <= t1))

    def shift(self, dt: float) -> "Trajectory":
        return Trajectory(
            self.t + dt, self.rotations.copy(), self.positions.copy(), self.weights, self.source
        )

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "Trajectory":
        """Trajectory re-expressed through the rigid map x -> R x + t."""
        R = np.asarray(rotation, dtype=float)
        p = np.asarray(translation, dtype=float)
        return Trajectory(
            self.t,
            np.einsum("ij,njk->nik", R, self.rotations),
            self.positions @ R.T + p,
            self.weights,
            self.source,
        )
