#!/usr/bin/env python3
"""Ground-truth generation and sensor calibration from the command line."""
import sys
from datetime import datetime

from rich import print

from groundtruth import log
from groundtruth.cli_tools import EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_OK, __version__
from groundtruth.cli_tools.argument_handling import parse_arguments
from groundtruth.cli_tools.commands import COMMAND_MAPPER
from groundtruth.cli_tools.helpers import obtain_config
from groundtruth.cli_tools.outputters import output_dispatcher, output_error, setup_logging
from groundtruth.exceptions import ConfigInvalidException, DataException

COMMAND = "gt"


def main_ep():
    sys.exit(main(sys.argv[1:]))


def main(args):
    start_time = datetime.now()

    # CLI ARGS #####
    try:
        cli_args = parse_arguments(args)
    except SystemExit as err:
        # argparse has already printed usage or help
        return err.code if isinstance(err.code, int) else EXIT_CONFIG_ERROR
    if cli_args.version:
        print(f"{COMMAND} v{__version__}")
        return EXIT_OK

    try:
        setup_logging(cli_args.log_level)
    except ValueError as err:
        output_error(str(err), title="Configuration error")
        return EXIT_CONFIG_ERROR

    # RUN #####
    try:
        cfg = obtain_config(cli_args)
        results = COMMAND_MAPPER[cli_args.command](cli_args, cfg)
    except ConfigInvalidException as err:
        log.error(f"{cli_args.command}: {err}")
        output_error(str(err), title="Configuration error")
        return EXIT_CONFIG_ERROR
    except (DataException, ValueError) as err:
        # ValueError: input values rejected by a library constructor
        log.error(f"{cli_args.command}: {type(err).__name__}: {err}")
        output_error(f"{type(err).__name__}: {err}", title="Data error")
        return EXIT_DATA_ERROR

    # OUTPUT PROCESSING #####
    output_dispatcher("json_raw" if cli_args.json else "text", results)

    if cli_args.display_runtime:
        print("Total time: {0}".format(datetime.now() - start_time))

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
