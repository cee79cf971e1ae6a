import argparse

from groundtruth.attitude.solvers import methods_str
from groundtruth.io_handling import SCHEMAS

LOG_LEVELS = ("error", "warn", "info", "debug")


def common_args(parser):
    """Add arguments shared by every subcommand."""
    parser.add_argument(
        "--config",
        help="YAML configuration file (default: GT_TOOLS_CFG, ./gt.yml, ~/.gt.yml)",
        action="store",
        default=None,
        type=str,
    )
    parser.add_argument(
        "--out", help="Output directory", action="store", default=".", type=str
    )
    parser.add_argument(
        "--log-level",
        help="Logging level (default: GT_LOG_LEVEL or warn)",
        choices=LOG_LEVELS,
        default=None,
    )
    parser.add_argument(
        "--json", help="Print the summary in JSON format", action="store_true"
    )
    parser.add_argument(
        "--display-runtime", help="Display program runtime", action="store_true"
    )


def stream_args(parser, required=("gnss1", "gnss2", "mag"), optional=("imu",)):
    for name in required:
        parser.add_argument(f"--{name}", help=f"{name} CSV file", required=True, type=str)
    for name in optional:
        parser.add_argument(f"--{name}", help=f"{name} CSV file (optional)", default=None, type=str)


def solve_args(parser):
    """Add arguments specific to gt solve."""
    stream_args(parser)
    parser.add_argument(
        "--method",
        help=f"Rotation solver, overrides attitude.method ({methods_str})",
        default=None,
        type=str,
    )


def timesync_args(parser):
    stream_args(parser)
    parser.add_argument(
        "--trajectory",
        help="Ground-truth trajectory CSV for the IMU offset",
        default=None,
        type=str,
    )


def align_args(parser):
    parser.add_argument(
        "--outdoor", help="Outdoor (world frame) trajectory CSV", required=True, action="append"
    )
    parser.add_argument(
        "--transition",
        help="Transition trajectory CSV, one per --outdoor",
        required=True,
        action="append",
    )
    parser.add_argument(
        "--source",
        help="Source label of the transition trajectories",
        choices=("marker", "mocap", "gnss"),
        default="marker",
    )


def magcal_intrinsic_args(parser):
    parser.add_argument("--mag", help="Magnetometer CSV file", required=True, type=str)


def magcal_extrinsic_args(parser):
    parser.add_argument("--mag", help="Magnetometer CSV file", required=True, type=str)
    parser.add_argument("--imu", help="IMU CSV file", required=True, type=str)


def markercal_args(parser):
    parser.add_argument("--markers", help="Marker detection CSV file", required=True, type=str)
    parser.add_argument(
        "--strict", help="Fail when a marker has no path to the main marker", action="store_true"
    )


def psd_args(parser):
    parser.add_argument("--imu", help="IMU CSV file", required=True, type=str)
    parser.add_argument(
        "--rate", help="Resampling rate in Hz (default: native IMU rate)", default=None, type=float
    )
    parser.add_argument(
        "--spectrogram", help="Also write spectrogram.csv", action="store_true"
    )


def rpmfit_args(parser):
    parser.add_argument("--table", help="rate,rpm CSV table", required=True, type=str)
    parser.add_argument(
        "--resonance-table", help="rpm,freq_hz CSV table", default=None, type=str
    )


def predict_args(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--motor-rates", help="Motor rate CSV file", type=str)
    source.add_argument("--rpm", help="RPM value(s)", type=float, nargs="+")


def allan_args(parser):
    parser.add_argument("--imu", help="IMU CSV file", required=True, type=str)
    parser.add_argument(
        "--channel",
        help="IMU channel to analyse",
        choices=SCHEMAS["imu"][1:],
        default="gx",
    )
    parser.add_argument("--n-taus", help="Number of averaging times", default=30, type=int)


def synth_args(parser):
    parser.add_argument("--seed", help="Random seed", default=0, type=int)
    parser.add_argument("--duration", help="Flight duration in seconds", default=60.0, type=float)
    parser.add_argument("--gnss-noise", help="GNSS noise sigma in meters", default=0.0, type=float)


SUBCOMMANDS = {
    "solve": ("Compute the ground-truth trajectory", solve_args),
    "timesync": ("Estimate the inter-sensor time offsets", timesync_args),
    "align": ("Align and stitch trajectory segments", align_args),
    "markercal": ("Calibrate a fiducial marker field", markercal_args),
    "synth": ("Write a synthetic fixture data set", synth_args),
}

NESTED_SUBCOMMANDS = {
    "magcal": (
        "Magnetometer calibration",
        {
            "intrinsic": ("Hard- and soft-iron calibration", magcal_intrinsic_args),
            "extrinsic": ("Magnetometer to IMU rotation", magcal_extrinsic_args),
        },
    ),
    "vibration": (
        "Vibration analysis",
        {
            "psd": ("Power spectral density and main peak", psd_args),
            "rpmfit": ("Fit rate-to-RPM and RPM-to-resonance models", rpmfit_args),
            "predict": ("Predict resonance frequencies", predict_args),
            "allan": ("Allan deviation and noise parameters", allan_args),
        },
    ),
}


def _add_command(subparsers, name, description, addl_args, dest_value):
    parser = subparsers.add_parser(name, help=description, description=description)
    common_args(parser)
    # Add additional arguments based (addl_args references a function)
    addl_args(parser)
    parser.set_defaults(command=dest_value)
    return parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gt", description="Offline ground-truth generation and sensor calibration"
    )
    parser.add_argument("--version", help="Display version", action="store_true")
    subparsers = parser.add_subparsers(dest="subcommand", metavar="<command>")
    for name, (description, addl_args) in SUBCOMMANDS.items():
        _add_command(subparsers, name, description, addl_args, name)
    for group, (description, commands) in NESTED_SUBCOMMANDS.items():
        group_parser = subparsers.add_parser(group, help=description, description=description)
        nested = group_parser.add_subparsers(dest="action", metavar="<action>")
        nested.required = True
        for name, (sub_description, addl_args) in commands.items():
            _add_command(nested, name, sub_description, addl_args, f"{group} {name}")
    return parser


def parse_arguments(args):
    """Parse command-line arguments; argparse exits with code 2 on usage errors."""
    parser = build_parser()
    cli_args = parser.parse_args(args)
    if not cli_args.version and not getattr(cli_args, "command", None):
        parser.error("No command specified.")
    if getattr(cli_args, "command", None) == "align" and len(cli_args.outdoor) != len(cli_args.transition):
        parser.error("Every --outdoor trajectory needs exactly one --transition trajectory.")
    return cli_args
