"""Motor-rate to RPM calibration and RPM to resonance-frequency line."""

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from groundtruth import log
from groundtruth.exceptions import RankDeficient
from groundtruth.timeseries import TimeSeries


@dataclass(frozen=True)
class RpmCalibration:
    """RPM = a0 + a1·rate + a2·rate²."""

    a0: float
    a1: float
    a2: float

    def predict(self, rate: "np.typing.ArrayLike") -> np.ndarray:
        r = np.asarray(rate, dtype=float)
        return self.a0 + self.a1 * r + self.a2 * r * r

    def as_list(self):
        return [self.a0, self.a1, self.a2]


@dataclass(frozen=True)
class ResonanceModel:
    """freq_hz = a0 + a1·rpm."""

    a0: float
    a1: float

    def predict(self, rpm: "np.typing.ArrayLike") -> np.ndarray:
        return self.a0 + self.a1 * np.asarray(rpm, dtype=float)

    def as_list(self):
        return [self.a0, self.a1]


def _polyfit(pairs: Iterable[Tuple[float, float]], degree: int, what: str) -> np.ndarray:
    data = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
    x, y = data[:, 0], data[:, 1]
    distinct = len(np.unique(x))
    if distinct < degree + 1:
        raise RankDeficient(f"{what} needs at least {degree + 1} distinct abscissae, got {distinct}")
    coef = Polynomial.fit(x, y, degree).convert().coef
    return np.pad(coef, (0, degree + 1 - len(coef)))


def fit_rate_to_rpm(pairs: Iterable[Tuple[float, float]]) -> RpmCalibration:
    a0, a1, a2 = _polyfit(pairs, 2, "rate to RPM fit")
    log.info(f"RPM calibration: a0={a0:.4f}, a1={a1:.4f}, a2={a2:.6f}")
    return RpmCalibration(float(a0), float(a1), float(a2))


def fit_resonance_line(pairs: Iterable[Tuple[float, float]]) -> ResonanceModel:
    a0, a1 = _polyfit(pairs, 1, "resonance line fit")
    log.info(f"Resonance line: a0={a0:.4f} Hz, a1={a1:.6f} Hz/RPM")
    return ResonanceModel(float(a0), float(a1))


def predict_rpm(cal: RpmCalibration, rate: "np.typing.ArrayLike") -> np.ndarray:
    return cal.predict(rate)


def predict_resonance_frequency(model: ResonanceModel, rpm: "np.typing.ArrayLike") -> np.ndarray:
    return model.predict(rpm)


def predict_resonances(model: ResonanceModel, cal: RpmCalibration, motor_rates: TimeSeries) -> TimeSeries:
    """Expected resonance per motor, chaining rate -> RPM -> Hz."""
    return TimeSeries(motor_rates.t, model.predict(cal.predict(motor_rates.values)))
