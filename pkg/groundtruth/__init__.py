import sys

__version__ = "1.0.0"
PY_MAJ_VER = 3
PY_MIN_VER = 9
MIN_PYTHON_VER = "3.9"


# Make sure user is using a valid Python version (for groundtruth)
def check_python_version():  # type: ignore
    msg = """

groundtruth Version {gt_ver} requires Python Version {py_ver} or higher.

""".format(
        gt_ver=__version__, py_ver=MIN_PYTHON_VER
    )
    if sys.version_info.major != PY_MAJ_VER:
        raise ValueError(msg)
    elif sys.version_info.minor < PY_MIN_VER:
        raise ValueError(msg)


check_python_version()  # type: ignore


import logging  # noqa


# Logging configuration
log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


from groundtruth.exceptions import (  # noqa
    GroundTruthBaseException,
    DataException,
    ConfigInvalidException,
)
from groundtruth.geometry import (  # noqa
    Pose,
    skew,
    exp_so3,
    log_so3,
    project_to_so3,
    compose_position,
    geodesic_distance,
)
from groundtruth.timeseries import Timestamped, TimeSeries, Trajectory  # noqa
from groundtruth.attitude import (  # noqa
    AntennaCalibration,
    WorldMagneticModel,
    RotationMethod,
    estimate_pose_epoch,
    worst_case_heading_error,
)
from groundtruth.config import PipelineConfig, load_config  # noqa
from groundtruth.pipeline import Dataset, run_ground_truth  # noqa

__all__ = (
    "GroundTruthBaseException",
    "DataException",
    "ConfigInvalidException",
    "Pose",
    "skew",
    "exp_so3",
    "log_so3",
    "project_to_so3",
    "compose_position",
    "geodesic_distance",
    "Timestamped",
    "TimeSeries",
    "Trajectory",
    "AntennaCalibration",
    "WorldMagneticModel",
    "RotationMethod",
    "estimate_pose_epoch",
    "worst_case_heading_error",
    "PipelineConfig",
    "load_config",
    "Dataset",
    "run_ground_truth",
)
