from groundtruth.vibration.spectral import (
    PowerSpectrum,
    Spectrogram,
    UniformSignal,
    acceleration_norm,
    find_main_peak,
    spectrogram,
    welch_psd,
)
from groundtruth.vibration.rpm import (
    ResonanceModel,
    RpmCalibration,
    fit_rate_to_rpm,
    fit_resonance_line,
    predict_resonance_frequency,
    predict_resonances,
    predict_rpm,
)
from groundtruth.vibration.allan import (
    AllanDeviation,
    AllanNoise,
    allan_deviation,
    allan_noise_parameters,
    default_taus,
)

__all__ = (
    "PowerSpectrum",
    "Spectrogram",
    "UniformSignal",
    "acceleration_norm",
    "find_main_peak",
    "spectrogram",
    "welch_psd",
    "ResonanceModel",
    "RpmCalibration",
    "fit_rate_to_rpm",
    "fit_resonance_line",
    "predict_resonance_frequency",
    "predict_resonances",
    "predict_rpm",
    "AllanDeviation",
    "AllanNoise",
    "allan_deviation",
    "allan_noise_parameters",
    "default_taus",
)
