"""Allan deviation of IMU channels and the noise terms read off its slopes."""

from dataclasses import dataclass

import allantools
import numpy as np

from groundtruth.exceptions import TauOutOfRange, TooFewSamples
from groundtruth.vibration.spectral import UniformSignal

# Minimum of the Allan deviation over the bias-instability floor
BIAS_INSTABILITY_FACTOR = 0.664


@dataclass(frozen=True, eq=False)
class AllanDeviation:
    taus: np.ndarray
    adev: np.ndarray


@dataclass(frozen=True)
class AllanNoise:
    white_noise: float
    bias_instability: float
    random_walk: float
    tau_white: float
    tau_random_walk: float


def tau_range(sig: UniformSignal):
    return 2.0 / sig.sample_rate, sig.duration / 9.0


def default_taus(sig: UniformSignal, n: int = 30) -> np.ndarray:
    lo, hi = tau_range(sig)
    if hi < lo:
        raise TooFewSamples(f"signal of {sig.duration:.3f} s is too short for an Allan deviation")
    return np.logspace(np.log10(lo), np.log10(hi), n)


def allan_deviation(sig: UniformSignal, taus: "np.typing.ArrayLike") -> AllanDeviation:
    """Overlapping Allan deviation of rate samples (``allantools.oadev``)."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    lo, hi = tau_range(sig)
    bad = taus[(taus < lo * (1 - 1e-12)) | (taus > hi * (1 + 1e-12))]
    if len(bad):
        raise TauOutOfRange(f"tau {bad.tolist()} outside the admissible range [{lo:.4g}, {hi:.4g}] s")
    taus_out, adev, _, _ = allantools.oadev(
        sig.values, rate=sig.sample_rate, data_type="freq", taus=taus
    )
    return AllanDeviation(np.asarray(taus_out), np.asarray(adev))


def allan_noise_parameters(result: AllanDeviation) -> AllanNoise:
    """White noise at τ = 1 s on the slope −½ line, bias instability from the minimum,
    random walk at τ = 3 s on the slope +½ line."""
    mask = (result.taus > 0) & (result.adev > 0)
    tau = result.taus[mask]
    adev = result.adev[mask]
    if len(tau) < 3:
        raise TooFewSamples("Allan noise extraction needs at least 3 positive deviations")

    slope = np.diff(np.log10(adev)) / np.diff(np.log10(tau))
    tau_mid = np.sqrt(tau[:-1] * tau[1:])
    ad_mid = np.sqrt(adev[:-1] * adev[1:])
    i_white = int(np.argmin(np.abs(slope + 0.5)))
    i_rw = int(np.argmin(np.abs(slope - 0.5)))

    return AllanNoise(
        white_noise=float(ad_mid[i_white] * np.sqrt(tau_mid[i_white])),
        bias_instability=float(adev.min() / BIAS_INSTABILITY_FACTOR),
        random_walk=float(ad_mid[i_rw] * np.sqrt(3.0 / tau_mid[i_rw])),
        tau_white=float(tau_mid[i_white]),
        tau_random_walk=float(tau_mid[i_rw]),
    )
