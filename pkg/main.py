import argparse
import os
import sys

from groundtruth.cli_tools import LOG_LEVEL_ENV
from groundtruth.cli_tools.gt import main as gt_main


def main():
    desc = "groundtruth: offline 6-DoF ground truth and sensor calibration"
    parser = argparse.ArgumentParser(description=desc, add_help=False)
    parser.add_argument("--debug", action="store_true", help="log at debug level")
    args, rest = parser.parse_known_args()

    if args.debug:
        os.environ[LOG_LEVEL_ENV] = "debug"
    sys.exit(gt_main(rest or ["--help"]))


if __name__ == "__main__":
    main()
