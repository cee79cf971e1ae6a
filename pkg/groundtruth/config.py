"""Pipeline configuration: YAML sections validated against typed defaults."""

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from groundtruth import log
from groundtruth.attitude import MAGNETIC_PRESETS, AntennaCalibration, WorldMagneticModel
from groundtruth.exceptions import ConfigInvalidException, DataException
from groundtruth.geometry import as_rotation, quaternion_to_rotation
from groundtruth import gt_globals
from groundtruth.magnetometer import EllipsoidCalibration
from groundtruth.utilities import expand_dotted_keys, find_cfg_file, load_yaml_file

ROTATION_METHODS = ("wahba", "linear", "tangent")
FIX_TYPES = ("fixed", "float", "no_rtk")
MAGNETIC_PRESET_NAMES = tuple(MAGNETIC_PRESETS) + ("none",)


def _choices(*values: str) -> Dict[str, Any]:
    return {"choices": values}


@dataclass
class AntennaConfig:
    p_I_G1: List[float] = field(default_factory=lambda: [-0.4243, 0.4243, 0.0])
    p_I_G2: List[float] = field(default_factory=lambda: [0.4243, -0.4243, 0.0])
    q_VG_I: List[float] = field(default_factory=lambda: [1.0, 0.0, 0.0, 0.0])

    def calibration(self) -> AntennaCalibration:
        return AntennaCalibration(
            np.array(self.p_I_G1), np.array(self.p_I_G2), quaternion_to_rotation(self.q_VG_I)
        )


@dataclass
class MagneticConfig:
    preset: str = field(default="klagenfurt", metadata=_choices(*MAGNETIC_PRESET_NAMES))
    declination_deg: Optional[float] = field(default=None, metadata={"type": float})
    inclination_deg: Optional[float] = field(default=None, metadata={"type": float})
    field_strength_nt: Optional[float] = field(default=None, metadata={"type": float})

    def model(self) -> WorldMagneticModel:
        base = MAGNETIC_PRESETS.get(self.preset)
        if base is None and (self.declination_deg is None or self.inclination_deg is None):
            raise ConfigInvalidException(
                "magnetic.preset is 'none': magnetic.declination_deg and magnetic.inclination_deg are required"
            )
        declination = np.radians(self.declination_deg) if self.declination_deg is not None else base.declination
        inclination = np.radians(self.inclination_deg) if self.inclination_deg is not None else base.inclination
        if self.field_strength_nt is not None:
            strength = self.field_strength_nt
        else:
            strength = base.field_strength if base is not None else 0.0
        try:
            return WorldMagneticModel(declination, inclination, strength)
        except ValueError as err:
            raise ConfigInvalidException(f"magnetic: {err}")


@dataclass
class MagnetometerConfig:
    offset: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    matrix: List[List[float]] = field(
        default_factory=lambda: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    q_I_M: List[float] = field(default_factory=lambda: [1.0, 0.0, 0.0, 0.0])

    def calibration(self) -> EllipsoidCalibration:
        try:
            return EllipsoidCalibration(np.array(self.offset), np.array(self.matrix))
        except ValueError as err:
            raise ConfigInvalidException(f"magnetometer: {err}")

    def rotation(self) -> np.ndarray:
        return quaternion_to_rotation(self.q_I_M)


@dataclass
class AttitudeConfig:
    method: str = field(default="wahba", metadata=_choices(*ROTATION_METHODS))
    alpha: float = gt_globals.DEFAULT_ALPHA
    min_baseline: float = gt_globals.MIN_BASELINE
    max_epoch_gap: float = gt_globals.MAX_MATCH_GAP


@dataclass
class GnssConfig:
    accepted_fix: List[str] = field(
        default_factory=lambda: ["fixed", "float"], metadata=_choices(*FIX_TYPES)
    )
    weight_by_covariance: bool = True


@dataclass
class TimesyncConfig:
    enabled: bool = True
    max_lag: float = gt_globals.MAX_LAG
    imu: bool = True
    shift_to_imu_clock: bool = True


@dataclass
class AlignmentConfig:
    max_gap: float = gt_globals.MAX_MATCH_GAP
    overlap_window: Optional[float] = field(default=None, metadata={"type": float})


@dataclass
class SegmentsConfig:
    priority: Dict[str, int] = field(default_factory=lambda: {"mocap": 3, "marker": 2, "gnss": 1})


@dataclass
class MarkersConfig:
    main_marker: int = 0
    n_paths: int = 32
    seed: int = 0
    path_penalty: float = 1.0
    path_jitter: float = 0.5


@dataclass
class VibrationConfig:
    window_s: float = 2.0
    overlap: float = 0.5
    min_freq: float = 20.0
    rpm_coefficients: List[float] = field(default_factory=lambda: [168.5541, 12.1870, -0.0023])
    resonance_coefficients: List[float] = field(default_factory=lambda: [10.6666, 0.0161])


@dataclass
class StaticConfig:
    gyro_threshold: float = 0.02
    min_duration: float = 1.0


@dataclass
class TolerancesConfig:
    rotation: float = gt_globals.ROTATION_TOL
    unit: float = gt_globals.UNIT_TOL
    parallel: float = gt_globals.PARALLEL_TOL
    singular: float = gt_globals.SINGULAR_TOL
    gn_step: float = gt_globals.GN_STEP_TOL
    gn_max_iter: int = gt_globals.GN_MAX_ITER
    median: float = gt_globals.MEDIAN_TOL


@dataclass
class WorkersConfig:
    max_workers: int = field(default_factory=lambda: int(os.environ.get("GT_MAX_THREADS", 4)))


@dataclass
class PipelineConfig:
    antenna: AntennaConfig = field(default_factory=AntennaConfig)
    magnetic: MagneticConfig = field(default_factory=MagneticConfig)
    magnetometer: MagnetometerConfig = field(default_factory=MagnetometerConfig)
    attitude: AttitudeConfig = field(default_factory=AttitudeConfig)
    gnss: GnssConfig = field(default_factory=GnssConfig)
    timesync: TimesyncConfig = field(default_factory=TimesyncConfig)
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    segments: SegmentsConfig = field(default_factory=SegmentsConfig)
    markers: MarkersConfig = field(default_factory=MarkersConfig)
    vibration: VibrationConfig = field(default_factory=VibrationConfig)
    static: StaticConfig = field(default_factory=StaticConfig)
    tolerances: TolerancesConfig = field(default_factory=TolerancesConfig)
    workers: WorkersConfig = field(default_factory=WorkersConfig)
    source: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "PipelineConfig":
        tree = expand_dotted_keys(data or {})
        cfg = cls()
        sections = {f.name: f for f in dataclasses.fields(cls) if f.name != "source"}
        for name, values in tree.items():
            if name not in sections:
                raise ConfigInvalidException(f"Unknown configuration section '{name}'")
            if not isinstance(values, dict):
                raise ConfigInvalidException(f"Configuration section '{name}' must be a mapping")
            section = getattr(cfg, name)
            known = {f.name: f for f in dataclasses.fields(section)}
            for key, value in values.items():
                if key not in known:
                    raise ConfigInvalidException(f"Unknown configuration key '{name}.{key}'")
                setattr(section, key, _coerce(f"{name}.{key}", known[key], getattr(section, key), value))
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """Cross-field checks that a single value cannot express."""
        checks = [
            (self.attitude.alpha > 0.0, "attitude.alpha must be positive"),
            (self.attitude.min_baseline >= 0.0, "attitude.min_baseline must be non-negative"),
            (self.timesync.max_lag > 0.0, "timesync.max_lag must be positive"),
            (self.alignment.max_gap >= 0.0, "alignment.max_gap must be non-negative"),
            (self.markers.n_paths >= 1, "markers.n_paths must be at least 1"),
            (0.0 <= self.vibration.overlap < 1.0, "vibration.overlap must be in [0, 1)"),
            (self.vibration.window_s > 0.0, "vibration.window_s must be positive"),
            (self.workers.max_workers >= 1, "workers.max_workers must be at least 1"),
            (self.tolerances.gn_max_iter >= 1, "tolerances.gn_max_iter must be at least 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigInvalidException(msg)
        try:
            as_rotation(self.antenna.calibration().R_VG_I, self.tolerances.rotation)
        except (ValueError, DataException) as err:
            raise ConfigInvalidException(f"antenna: {err}")
        self.magnetic.model()
        self.magnetometer.calibration()

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data.pop("source", None)
        return data


def _coerce(key: str, spec: "dataclasses.Field[Any]", default: Any, value: Any) -> Any:
    choices = spec.metadata.get("choices")
    try:
        if default is None:
            if value is None:
                return None
            return spec.metadata.get("type", float)(value)
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError("expected true or false")
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError("expected an integer")
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise TypeError("expected a number")
            return float(value)
        if isinstance(default, str):
            value = str(value).lower()
            if choices and value not in choices:
                raise TypeError(f"expected one of {', '.join(choices)}")
            return value
        if isinstance(default, dict):
            if not isinstance(value, dict):
                raise TypeError("expected a mapping")
            return {str(k): int(v) for k, v in value.items()}
        if isinstance(default, list):
            if choices:
                items = [str(v).lower() for v in value]
                unknown = [v for v in items if v not in choices]
                if unknown:
                    raise TypeError(f"unknown entries {unknown}, expected from {', '.join(choices)}")
                return items
            arr = np.asarray(value, dtype=float)
            if arr.shape != np.asarray(default).shape:
                raise TypeError(f"expected shape {np.asarray(default).shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise TypeError("expected finite numbers")
            return arr.tolist()
    except (TypeError, ValueError) as err:
        raise ConfigInvalidException(f"Invalid value for '{key}': {value!r} ({err})")
    raise ConfigInvalidException(f"Unsupported configuration key '{key}'")


def load_config(file_name: Optional[str] = None) -> PipelineConfig:
    """Load the configuration found by ``find_cfg_file``; defaults when there is none."""
    cfg_file = find_cfg_file(file_name)
    if cfg_file is None:
        return PipelineConfig()
    data = load_yaml_file(cfg_file)
    if data is not None and not isinstance(data, dict):
        raise ConfigInvalidException(f"{cfg_file}: top level must be a mapping")
    cfg = PipelineConfig.from_dict(data)
    cfg.source = str(cfg_file)
    log.info(f"Loaded configuration from {cfg_file}")
    return cfg
