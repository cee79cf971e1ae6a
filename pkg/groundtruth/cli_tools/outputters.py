import json
import logging
import os

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.style import Style
from rich.syntax import Syntax
from rich.table import Table
from rich.theme import Theme

from groundtruth.cli_tools import DEFAULT_LOG_LEVEL, LOG_LEVEL_ENV
from groundtruth.report import to_plain

NAVY_BLUE = "#000080"
BLUE = "#1E90FF"

# "xcode"/"trac" alternate light themes
DEFAULT_THEME = "trac"
DEFAULT_BOX = NAVY_BLUE

CUSTOM_THEME = Theme(
    {
        "section": "bold magenta",
        "border": BLUE,
        "value": "green",
        "failed_title": "bold #800000",
        "failed_border": "#800000",
    }
)

LOG_LEVEL_MAPPER = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def setup_logging(level=None):
    """Route the package logger through rich; level from argument, GT_LOG_LEVEL or warn."""
    name = (level or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).lower()
    if name not in LOG_LEVEL_MAPPER:
        raise ValueError(
            f"Unsupported log level '{name}', currently supported levels are: error, warn, info, debug"
        )
    logger = logging.getLogger("groundtruth")
    logger.setLevel(LOG_LEVEL_MAPPER[name])
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    return logger


def _format_value(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def output_text(results):
    console = Console(theme=CUSTOM_THEME)

    for section, values in results.items():
        table = Table(show_header=False, box=None, padding=(0, 1))
        table.add_column(style="section")
        table.add_column(style="value")
        if isinstance(values, dict):
            for key, value in values.items():
                table.add_row(str(key), _format_value(value))
        else:
            table.add_row("", _format_value(values))
        panel = Panel(
            table,
            title=section,
            expand=False,
            border_style="border",
            title_align="left",
            padding=(1, 1),
        )
        console.print(panel)


def output_json(results, raw=False):
    formatted_json = json.dumps(to_plain(results), indent=2, sort_keys=True)
    if raw:
        print(formatted_json)
        return
    console = Console(theme=CUSTOM_THEME)
    syntax = Syntax(formatted_json, "json", theme=DEFAULT_THEME)
    console.print(Panel(syntax, border_style=Style(color=DEFAULT_BOX), expand=False, padding=(1, 1)))


def output_error(msg, title="Failed"):
    console = Console(theme=CUSTOM_THEME, stderr=True)
    panel = Panel(
        f"\n  {msg}\n",
        title=title,
        expand=False,
        border_style="failed_border",
        title_align="left",
        padding=(1, 1),
    )
    console.print(panel)


def output_dispatcher(out_format, results):

    output_functions = {
        "text": output_text,
        "json": output_json,
        "json_raw": output_json,
    }
    kwargs = {}
    func = output_functions.get(out_format, output_text)
    if out_format == "json_raw":
        kwargs["raw"] = True

    return func(results, **kwargs)
