from groundtruth import __version__  # noqa

LOG_LEVEL_ENV = "GT_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "warn"

# Exit codes
EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_CONFIG_ERROR = 2
