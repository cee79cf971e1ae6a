"""Directional triads from the antenna baseline and the magnetic field."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from groundtruth.exceptions import DegenerateBaseline, ParallelVectors
from groundtruth.geometry import as_rotation, as_vec3
from groundtruth.gt_globals import MIN_BASELINE, PARALLEL_TOL, UNIT_TOL

if TYPE_CHECKING:
    from groundtruth.magnetometer.intrinsic import EllipsoidCalibration


@dataclass(frozen=True)
class WorldMagneticModel:
    """Local magnetic field: declination (rad, east positive), inclination (rad, down
    positive) and total intensity (nT)."""

    declination: float
    inclination: float
    field_strength: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.declination) and np.isfinite(self.inclination)):
            raise ValueError("magnetic declination and inclination must be finite")
        if abs(self.inclination) > np.pi / 2:
            raise ValueError(f"inclination {self.inclination} rad is outside [-pi/2, pi/2]")

    @classmethod
    def from_degrees(
        cls, declination_deg: float, inclination_deg: float, field_strength: float = 0.0
    ) -> "WorldMagneticModel":
        return cls(np.radians(declination_deg), np.radians(inclination_deg), field_strength)

    @classmethod
    def from_degrees_minutes(
        cls,
        declination: "tuple[float, float]",
        inclination: "tuple[float, float]",
        field_strength: float = 0.0,
    ) -> "WorldMagneticModel":
        """Build from (degrees, arc-minutes) pairs; the sign of the degrees applies to both."""

        def _deg(pair: "tuple[float, float]") -> float:
            deg, minutes = pair
            return float(np.copysign(abs(deg) + minutes / 60.0, deg if deg != 0 else 1.0))

        return cls.from_degrees(_deg(declination), _deg(inclination), field_strength)


KLAGENFURT = WorldMagneticModel.from_degrees_minutes((4, 9), (63, 8), 48300.8)

MAGNETIC_PRESETS = {
    "klagenfurt": KLAGENFURT,
}


def world_mag_vector(model: WorldMagneticModel) -> np.ndarray:
    """Unit field direction in ENU: (sin D cos I, cos D cos I, -sin I)."""
    D, I = model.declination, model.inclination
    return np.array([np.sin(D) * np.cos(I), np.cos(D) * np.cos(I), -np.sin(I)])


@dataclass(frozen=True, eq=False)
class AntennaCalibration:
    """Antenna lever arms in the IMU frame and the virtual-GNSS-to-IMU rotation."""

    p_I_G1: np.ndarray
    p_I_G2: np.ndarray
    R_VG_I: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_I_G1", as_vec3(self.p_I_G1, "p_I_G1"))
        object.__setattr__(self, "p_I_G2", as_vec3(self.p_I_G2, "p_I_G2"))
        object.__setattr__(self, "R_VG_I", as_rotation(self.R_VG_I))
        if self.baseline == 0.0:
            raise DegenerateBaseline("antenna lever arms coincide, baseline is zero")

    @property
    def baseline(self) -> float:
        return float(np.linalg.norm(self.p_I_G1 - self.p_I_G2))


@dataclass(frozen=True, eq=False)
class DirectionalTriad:
    """Unit vectors g (baseline), m (magnetic) and c = normalize(g x m) in one frame."""

    g: np.ndarray
    m: np.ndarray
    c: np.ndarray

    def matrix(self) -> np.ndarray:
        """Columns [g m c]."""
        return np.column_stack([self.g, self.m, self.c])

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.g, self.m, self.c])


def make_triad(
    g: np.ndarray, m: np.ndarray, parallel_tol: float = PARALLEL_TOL, unit_tol: float = UNIT_TOL
) -> DirectionalTriad:
    g = as_vec3(g, "g")
    m = as_vec3(m, "m")
    g_norm = np.linalg.norm(g)
    m_norm = np.linalg.norm(m)
    if g_norm <= unit_tol or m_norm <= unit_tol:
        raise ParallelVectors(f"zero-length triad vector (|g| = {g_norm:.3e}, |m| = {m_norm:.3e})")
    g = g / g_norm
    m = m / m_norm
    cross = np.cross(g, m)
    cross_norm = np.linalg.norm(cross)
    if cross_norm <= parallel_tol:
        raise ParallelVectors(f"baseline and magnetic directions are parallel (|g x m| = {cross_norm:.3e})")
    return DirectionalTriad(g, m, cross / cross_norm)


def build_world_triad(
    p_W_G1: "np.typing.ArrayLike",
    p_W_G2: "np.typing.ArrayLike",
    m_w: "np.typing.ArrayLike",
    min_baseline: float = MIN_BASELINE,
    parallel_tol: float = PARALLEL_TOL,
    unit_tol: float = UNIT_TOL,
) -> DirectionalTriad:
    baseline = as_vec3(p_W_G1, "p_W_G1") - as_vec3(p_W_G2, "p_W_G2")
    length = np.linalg.norm(baseline)
    if length <= min_baseline:
        raise DegenerateBaseline(
            f"antenna baseline {length:.4f} m is not above the minimum {min_baseline} m"
        )
    return make_triad(baseline, m_w, parallel_tol, unit_tol)


def build_body_triad(
    cal: AntennaCalibration,
    m_i_raw: "np.typing.ArrayLike",
    mag_cal: Optional["EllipsoidCalibration"] = None,
    R_I_M: Optional[np.ndarray] = None,
    parallel_tol: float = PARALLEL_TOL,
    unit_tol: float = UNIT_TOL,
) -> DirectionalTriad:
    """Body triad: g_i from the lever arms, m_i from the corrected magnetometer sample."""
    m = as_vec3(m_i_raw, "magnetometer sample")
    if mag_cal is not None:
        m = mag_cal.correct(m)
    if R_I_M is not None:
        m = R_I_M @ m
    return make_triad(cal.p_I_G1 - cal.p_I_G2, m, parallel_tol, unit_tol)
