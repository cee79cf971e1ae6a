"""Normalized cross-correlation of scalar traces with sub-sample peak refinement."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from groundtruth import log
from groundtruth.exceptions import FlatSignal, InsufficientOverlap, TooFewSamples
from groundtruth.gt_globals import MAX_LAG, MIN_OVERLAP_FRACTION
from groundtruth.timeseries import TimeSeries

# Relative standard deviation below which a trace counts as constant
FLAT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignalTrace:
    """Scalar channel ``v`` sampled at strictly increasing times ``t`` (seconds)."""

    t: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if len(t) != len(v):
            raise ValueError(f"trace has {len(t)} timestamps but {len(v)} values")
        if len(t) < 2:
            raise TooFewSamples(f"trace needs at least 2 samples, got {len(t)}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("trace has non-finite entries")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("trace timestamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_series(cls, series: TimeSeries) -> "SignalTrace":
        return cls(series.t, series.values.reshape(len(series), -1)[:, 0])

    @property
    def rate(self) -> float:
        return 1.0 / float(np.median(np.diff(self.t)))

    def shift(self, dt: float) -> "SignalTrace":
        return SignalTrace(self.t + dt, self.v)


@dataclass(frozen=True)
class TimeOffset:
    """``delta`` > 0 means the second signal lags the first by ``delta`` seconds."""

    delta: float
    peak_correlation: float
    lags_evaluated: int = 0


def differentiate(series: TimeSeries) -> TimeSeries:
    """Time derivative: central differences inside, one-sided at both ends."""
    n = len(series)
    if n < 2:
        raise TooFewSamples(f"differentiation needs at least 2 samples, got {n}")
    edge_order = 2 if n >= 3 else 1
    return TimeSeries(series.t, np.gradient(series.values, series.t, axis=0, edge_order=edge_order))


def resample_common(a: SignalTrace, b: SignalTrace) -> Tuple[np.ndarray, np.ndarray, float]:
    """Both traces on one uniform lattice at the faster native rate.

    Returns ``(va, vb, dt)``; samples outside a trace's own time span are NaN.
    """
    dt = 1.0 / max(a.rate, b.rate)
    t0 = min(a.t[0], b.t[0])
    t1 = max(a.t[-1], b.t[-1])
    grid = t0 + dt * np.arange(int(np.floor((t1 - t0) / dt + 1e-9)) + 1)
    va = np.interp(grid, a.t, a.v, left=np.nan, right=np.nan)
    vb = np.interp(grid, b.t, b.v, left=np.nan, right=np.nan)
    return va, vb, dt


def _is_flat(v: np.ndarray) -> bool:
    finite = v[np.isfinite(v)]
    scale = max(1.0, float(np.max(np.abs(finite)))) if len(finite) else 1.0
    return len(finite) < 2 or float(np.std(finite)) <= FLAT_TOL * scale


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0.0:
        return np.nan
    return float(xc @ yc / denom)


def estimate_offset_xcorr(a: SignalTrace, b: SignalTrace, max_lag: float = MAX_LAG) -> TimeOffset:
    """Lag maximizing the normalized cross-correlation of ``b`` against ``a``.

    The lag search covers [-max_lag, max_lag] on the common lattice. Lags whose overlap
    is less than half of the shorter trace are not admissible. The discrete maximum is
    refined with a parabola through its two neighbours.
    """
    va, vb, dt = resample_common(a, b)
    if _is_flat(va) or _is_flat(vb):
        raise FlatSignal("trace has zero variance, the time offset is unobservable")

    ok_a = np.isfinite(va)
    ok_b = np.isfinite(vb)
    min_overlap = MIN_OVERLAP_FRACTION * min(ok_a.sum(), ok_b.sum())
    n = len(va)
    max_k = min(int(np.floor(max_lag / dt + 1e-9)), n - 1)
    lags = np.arange(-max_k, max_k + 1)
    corr = np.full(len(lags), np.nan)
    for idx, k in enumerate(lags):
        # pair a[i] with b[i + k]
        if k >= 0:
            xa, xb = va[: n - k], vb[k:]
            mask = ok_a[: n - k] & ok_b[k:]
        else:
            xa, xb = va[-k:], vb[: n + k]
            mask = ok_a[-k:] & ok_b[: n + k]
        if mask.sum() < max(min_overlap, 3):
            continue
        corr[idx] = _pearson(xa[mask], xb[mask])

    admissible = np.isfinite(corr)
    if admissible.sum() < 3:
        raise InsufficientOverlap(
            f"only {int(admissible.sum())} lags within +/-{max_lag} s have enough overlap"
        )

    best = int(np.nanargmax(corr))
    peak = float(corr[best])
    frac = 0.0
    if 0 < best < len(lags) - 1 and admissible[best - 1] and admissible[best + 1]:
        left, right = corr[best - 1], corr[best + 1]
        curvature = left - 2.0 * peak + right
        if curvature < 0.0:
            frac = float(np.clip(0.5 * (left - right) / curvature, -0.5, 0.5))
            peak = float(peak - 0.25 * (left - right) * frac)
    else:
        log.warning(f"cross-correlation peak at the edge of the +/-{max_lag} s search window")

    delta = (lags[best] + frac) * dt
    log.debug(f"xcorr: {admissible.sum()} admissible lags, dt={dt:.4g} s, peak {peak:.4f} at {delta:.4f} s")
    return TimeOffset(float(delta), float(np.clip(peak, -1.0, 1.0)), int(admissible.sum()))
