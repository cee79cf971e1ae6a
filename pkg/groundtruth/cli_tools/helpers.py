import os
from typing import Optional

from groundtruth import io_handling
from groundtruth.config import PipelineConfig, load_config
from groundtruth.pipeline import Dataset
from groundtruth.utilities import ensure_dir_exists

STREAM_LOADERS = {
    "gnss1": io_handling.load_gnss,
    "gnss2": io_handling.load_gnss,
    "mag": io_handling.load_mag,
    "imu": io_handling.load_imu,
    "markers": io_handling.load_markers,
    "motor_rates": io_handling.load_motor_rates,
}


def obtain_config(cli_args) -> PipelineConfig:
    """Configuration from --config, GT_TOOLS_CFG or the default search path."""
    return load_config(cli_args.config)


def obtain_dataset(cli_args) -> Dataset:
    """Load every stream whose file argument is present on the command line."""
    streams = {}
    for name, loader in STREAM_LOADERS.items():
        path: Optional[str] = getattr(cli_args, name, None)
        if path:
            streams[name] = loader(path)
    return Dataset(**streams)


def out_path(cli_args, file_name: str) -> str:
    ensure_dir_exists(cli_args.out)
    return os.path.join(cli_args.out, file_name)
