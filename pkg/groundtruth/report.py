import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, TextIO, Union

import numpy as np

from groundtruth import __version__
from groundtruth.attitude.pose import EpochError
from groundtruth.timesync.xcorr import TimeOffset


def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and nested containers to JSON-serializable objects."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def residual_stats(residuals: "np.typing.ArrayLike") -> Dict[str, float]:
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        return {"count": 0}
    return {
        "count": int(r.size),
        "mean": float(r.mean()),
        "rms": float(np.sqrt(np.mean(r * r))),
        "max": float(r.max()),
    }


@dataclass
class CalibrationReport:
    """Everything a run estimated besides the trajectory itself."""

    config: Dict[str, Any] = field(default_factory=dict)
    offsets: Dict[str, Dict[str, float]] = field(default_factory=dict)
    residuals: Dict[str, Dict[str, float]] = field(default_factory=dict)
    fix_counts: Dict[str, int] = field(default_factory=dict)
    skipped_epochs: List[EpochError] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def add_offset(self, name: str, offset: TimeOffset) -> None:
        self.offsets[name] = {
            "delta_s": offset.delta,
            "peak_correlation": offset.peak_correlation,
            "lags_evaluated": offset.lags_evaluated,
        }

    def add_residuals(self, method: str, residuals: "np.typing.ArrayLike") -> None:
        self.residuals[method] = residual_stats(residuals)

    def flag(self, msg: str) -> None:
        if msg not in self.flags:
            self.flags.append(msg)

    def to_dict(self) -> Dict[str, Any]:
        return to_plain(
            {
                "version": self.version,
                "config": self.config,
                "offsets": self.offsets,
                "residuals": self.residuals,
                "fix_counts": self.fix_counts,
                "skipped_epochs": [
                    {"t_s": e.t, "reason": e.reason, "kind": e.kind} for e in self.skipped_epochs
                ],
                "flags": self.flags,
                "results": self.results,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class ReportWriter:
    """Buffered JSON report output to a file name or an already open text stream."""

    def __init__(
        self,
        file_name: Optional[str] = None,
        buffered_io: Optional[TextIO] = None,
        file_encoding: str = "utf-8",
    ) -> None:
        self.file_name = file_name
        self.file_encoding = file_encoding
        self._report_close = False

        self.report_file: Union[TextIO, None]
        if file_name is None and buffered_io:
            self.report_file = buffered_io
        else:
            self.report_file = None
        self.buffer = io.StringIO()

    def __enter__(self) -> "ReportWriter":
        self.open()
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    def open(self) -> None:
        if self.file_name is None:
            return None
        # newline="" keeps "\n" on every platform
        self.report_file = open(self.file_name, mode="w", encoding=self.file_encoding, newline="")
        self._report_close = True

    def close(self) -> None:
        """Flush and close the file if this writer opened it."""
        self.flush()
        if self.report_file and self._report_close:
            self.report_file.close()
            self.report_file = None

    def _read_buffer(self) -> str:
        self.buffer.seek(0)
        data = self.buffer.read()
        self.buffer = io.StringIO()
        return data

    def flush(self) -> None:
        if self.report_file is not None:
            self.report_file.write(self._read_buffer())
            self.report_file.flush()

    def write(self, report: "CalibrationReport | Dict[str, Any]") -> None:
        if isinstance(report, CalibrationReport):
            self.buffer.write(report.to_json())
        else:
            self.buffer.write(json.dumps(to_plain(report), sort_keys=True, indent=2) + "\n")


def write_report(path: str, report: "CalibrationReport | Dict[str, Any]") -> str:
    with ReportWriter(path) as writer:
        writer.write(report)
    return path
