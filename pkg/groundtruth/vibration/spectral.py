"""Power spectral density, spectrogram and resonance peak extraction."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from groundtruth import log
from groundtruth.exceptions import NoPeak, TooFewSamples, WindowTooLong
from groundtruth.timeseries import TimeSeries

DEFAULT_WINDOW_S = 2.0
DEFAULT_OVERLAP = 0.5
DEFAULT_MIN_FREQ = 20.0


@dataclass(frozen=True, eq=False)
class UniformSignal:
    """Uniformly sampled scalar signal; ``t0`` is the time of the first sample."""

    sample_rate: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if not self.sample_rate > 0.0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if len(values) < 2:
            raise TooFewSamples(f"signal needs at least 2 samples, got {len(values)}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return len(self.values) / self.sample_rate


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    freqs: np.ndarray
    power: np.ndarray


@dataclass(frozen=True, eq=False)
class Spectrogram:
    times: np.ndarray
    freqs: np.ndarray
    power: np.ndarray  # (n_freqs, n_times)


def acceleration_norm(imu: TimeSeries, sample_rate: Optional[float] = None) -> UniformSignal:
    """Norm of the accelerometer channels on a uniform lattice at the IMU rate."""
    rate = sample_rate or imu.rate
    norm = np.linalg.norm(imu.values[:, 3:6], axis=1)
    n = int(np.floor(imu.duration * rate + 1e-9)) + 1
    grid = imu.t[0] + np.arange(n) / rate
    return UniformSignal(rate, np.interp(grid, imu.t, norm), float(imu.t[0]))


def _segment(sig: UniformSignal, window_len: Optional[int], overlap: float):
    nperseg = int(window_len) if window_len else int(round(DEFAULT_WINDOW_S * sig.sample_rate))
    if nperseg > len(sig):
        raise WindowTooLong(f"window of {nperseg} samples is longer than the signal ({len(sig)} samples)")
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    return nperseg, int(overlap * nperseg)


def welch_psd(
    sig: UniformSignal, window_len: Optional[int] = None, overlap: float = DEFAULT_OVERLAP
) -> PowerSpectrum:
    """Averaged Hann-window periodograms, density scaling (integral equals the variance)."""
    nperseg, noverlap = _segment(sig, window_len, overlap)
    freqs, power = signal.welch(
        sig.values,
        fs=sig.sample_rate,
        window="hann",
        nperseg=nperseg,
        noverlap=noverlap,
        detrend="constant",
        scaling="density",
    )
    return PowerSpectrum(freqs, power)


def spectrogram(
    sig: UniformSignal, window_len: Optional[int] = None, overlap: float = DEFAULT_OVERLAP
) -> Spectrogram:
    nperseg, noverlap = _segment(sig, window_len, overlap)
    freqs, times, power = signal.spectrogram(
        sig.values,
        fs=sig.sample_rate,
        window="hann",
        nperseg=nperseg,
        noverlap=noverlap,
        detrend="constant",
        scaling="density",
    )
    return Spectrogram(times + sig.t0, freqs, power)


def find_main_peak(spec: PowerSpectrum, min_freq: float = DEFAULT_MIN_FREQ) -> float:
    """Frequency of the strongest local maximum above ``min_freq``.

    Refined with a parabola through the log power of the peak bin and its neighbours.
    """
    if len(spec.freqs) == 0:
        raise NoPeak("empty spectrum")
    start = int(np.searchsorted(spec.freqs, min_freq))
    power = spec.power[start:]
    peaks, _ = signal.find_peaks(power)
    peaks = peaks[power[peaks] > 0.0]
    if not len(peaks):
        raise NoPeak(f"no spectral peak above {min_freq} Hz")
    k = start + int(peaks[np.argmax(power[peaks])])

    freq = float(spec.freqs[k])
    neighbours = spec.power[k - 1 : k + 2]
    if np.all(neighbours > 0.0):
        left, mid, right = np.log(neighbours)
        curvature = left - 2.0 * mid + right
        if curvature < 0.0:
            df = float(spec.freqs[k + 1] - spec.freqs[k])
            freq += 0.5 * (left - right) / curvature * df
    log.debug(f"main peak at {freq:.3f} Hz")
    return freq
