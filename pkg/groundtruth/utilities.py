"""Miscellaneous utility functions."""

from typing import Any, Callable, Dict, Optional, TypeVar, Union, cast
from typing import TYPE_CHECKING
from glob import glob
import io
import os
import functools
from datetime import datetime

import yaml

from groundtruth import log
from groundtruth.exceptions import ConfigInvalidException

# For decorators
F = TypeVar("F", bound=Callable[..., Any])

if TYPE_CHECKING:
    from os import PathLike

CFG_ENV_VAR = "GT_TOOLS_CFG"
CFG_FILE_NAMES = ("gt.yml", ".gt.yml")


def load_yaml_file(yaml_file: Union[str, "PathLike[Any]"]) -> Any:
    """Read YAML file."""
    try:
        with io.open(yaml_file, "rt", encoding="utf-8") as fname:
            return yaml.safe_load(fname)
    except IOError as err:
        raise ConfigInvalidException(f"Unable to open YAML file {yaml_file}: {err}")
    except yaml.YAMLError as err:
        raise ConfigInvalidException(f"Unable to parse YAML file {yaml_file}: {err}")


def find_cfg_file(
    file_name: Union[str, "PathLike[Any]", None] = None
) -> Optional[Union[str, "PathLike[Any]"]]:
    """
    Search for the gt configuration file in the following order:
    Explicit file_name argument
    GT_TOOLS_CFG environment variable (file or directory)
    Current directory
    Home directory
    Look for file named: gt.yml or .gt.yml

    Returns None when no file exists, in which case all defaults apply.
    """
    if file_name:
        if os.path.isfile(file_name):
            return file_name
        raise ConfigInvalidException(f"Configuration file {file_name} does not exist")
    optional_path = os.environ.get(CFG_ENV_VAR, "")
    if os.path.isfile(optional_path):
        return optional_path
    search_paths = [optional_path, ".", os.path.expanduser("~")]
    # Filter optional_path if null
    search_paths = [path for path in search_paths if path]
    for path in search_paths:
        for name in CFG_FILE_NAMES:
            files = glob(f"{path}/{name}")
            if files:
                return files[0]
    log.debug("No gt.yml found, using default configuration")
    return None


def expand_dotted_keys(data: Dict[str, Any]) -> Dict[str, Any]:
    """Turn {'attitude.alpha': 50} into {'attitude': {'alpha': 50}}, merging with nested keys."""
    tree: Dict[str, Any] = {}
    for key, value in data.items():
        if not isinstance(key, str):
            raise ConfigInvalidException(f"Configuration keys must be strings, got {key!r}")
        if isinstance(value, dict):
            value = expand_dotted_keys(value)
        node = tree
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigInvalidException(f"Configuration key {key} conflicts with a scalar value")
        leaf = parts[-1]
        if isinstance(value, dict) and isinstance(node.get(leaf), dict):
            node[leaf].update(value)
        else:
            node[leaf] = value
    return tree


def ensure_dir_exists(verify_dir: str) -> None:
    """Ensure directory exists. Create if necessary."""
    if not os.path.exists(verify_dir):
        # Doesn't exist create dir
        os.makedirs(verify_dir)
    else:
        # Exists
        if not os.path.isdir(verify_dir):
            # Not a dir, raise an exception
            raise ValueError(f"{verify_dir} is not a directory")


def f_exec_time(func: F) -> F:
    @functools.wraps(func)
    def wrapper_decorator(*args: Any, **kwargs: Any) -> Any:
        start_time = datetime.now()
        result = func(*args, **kwargs)
        end_time = datetime.now()
        log.info(f"{func.__name__}: elapsed time {end_time - start_time}")
        return result

    return cast(F, wrapper_decorator)
