"""CSV ingestion and output in the canonical column layouts."""

import re
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from groundtruth import log
from groundtruth.exceptions import ConfigInvalidException, MissingColumn, NonMonotonicTime, ParseError
from groundtruth.geometry import Pose, quaternion_to_rotation, rotation_to_quaternion
from groundtruth.markers import MarkerFieldCalibration, MarkerObservation
from groundtruth.pipeline import GnssFix, GnssSeries
from groundtruth.timeseries import TimeSeries, Trajectory

SCHEMAS: Dict[str, List[str]] = {
    "gnss": ["t_s", "east_m", "north_m", "up_m", "fix", "var_e", "var_n", "var_u"],
    "mag": ["t_s", "mx", "my", "mz"],
    "imu": ["t_s", "gx", "gy", "gz", "ax", "ay", "az"],
    "markers": ["t_s", "image_id", "marker_id", "qw", "qx", "qy", "qz", "tx", "ty", "tz"],
    "motor_rates": ["t_s", "r1", "r2", "r3", "r4"],
    "trajectory": ["t_s", "px", "py", "pz", "qw", "qx", "qy", "qz"],
    "rpm_table": ["rate", "rpm"],
    "resonance_table": ["rpm", "freq_hz"],
    "marker_field": ["marker_id", "qw", "qx", "qy", "qz", "tx", "ty", "tz"],
}

# Columns parsed as text instead of numbers
TEXT_COLUMNS = {"fix"}
# Header is line 1, the first data row is line 2
FIRST_DATA_LINE = 2
# pandas tokenizer errors name the physical file line
PARSER_LINE = re.compile(r"\bline (\d+)")


def load_csv(path: str, schema: str, strict_time: bool = True) -> pd.DataFrame:
    """Read ``path`` and validate it against ``SCHEMAS[schema]``.

    Numeric columns are parsed as float64. Timestamps (``t_s``) must increase strictly,
    or be non-decreasing when ``strict_time`` is False.
    """
    columns = SCHEMAS[schema]
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except OSError as err:
        raise ConfigInvalidException(f"Unable to open input file {path}: {err}")
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path}: file is empty", line=1)
    except pd.errors.ParserError as err:
        found = PARSER_LINE.search(str(err))
        raise ParseError(f"{path}: {err}", line=int(found.group(1)) if found else None)
    raw.columns = [str(c).strip() for c in raw.columns]

    for column in columns:
        if column not in raw.columns:
            raise MissingColumn(f"{path}: missing column '{column}'", column=column)

    df = pd.DataFrame(index=raw.index)
    for column in columns:
        if column in TEXT_COLUMNS:
            df[column] = raw[column].str.strip().str.lower()
            continue
        values = pd.to_numeric(raw[column].str.strip(), errors="coerce")
        bad = ~np.isfinite(values.to_numpy(dtype=float))
        if bad.any():
            row = int(np.argmax(bad))
            raise ParseError(
                f"{path}, line {row + FIRST_DATA_LINE}: column '{column}' value {raw[column].iloc[row]!r} is not a finite number",
                line=row + FIRST_DATA_LINE,
            )
        df[column] = values.astype(float)

    if "t_s" in df.columns and len(df) > 1:
        steps = np.diff(df["t_s"].to_numpy())
        wrong = steps <= 0.0 if strict_time else steps < 0.0
        if wrong.any():
            row = int(np.argmax(wrong)) + 1
            raise NonMonotonicTime(
                f"{path}, line {row + FIRST_DATA_LINE}: timestamp {df['t_s'].iloc[row]!r} does not increase",
                line=row + FIRST_DATA_LINE,
            )
    log.debug(f"loaded {len(df)} rows from {path} ({schema})")
    return df


def load_gnss(path: str) -> GnssSeries:
    df = load_csv(path, "gnss")
    try:
        fix = [GnssFix(v) for v in df["fix"]]
    except ValueError:
        bad = [k for k, v in enumerate(df["fix"]) if v not in GnssFix._value2member_map_]
        row = bad[0] + FIRST_DATA_LINE
        raise ParseError(f"{path}, line {row}: unknown fix type {df['fix'].iloc[bad[0]]!r}", line=row)
    cov = df[["var_e", "var_n", "var_u"]].to_numpy()
    negative = (cov < 0.0).any(axis=1)
    if negative.any():
        row = int(np.argmax(negative)) + FIRST_DATA_LINE
        raise ParseError(f"{path}, line {row}: GNSS variances must be non-negative", line=row)
    try:
        return GnssSeries(
            df["t_s"].to_numpy(),
            df[["east_m", "north_m", "up_m"]].to_numpy(),
            np.array(fix, dtype=object),
            cov,
        )
    except ValueError as err:
        raise ParseError(f"{path}: {err}")


def load_mag(path: str) -> TimeSeries:
    df = load_csv(path, "mag")
    return TimeSeries(df["t_s"].to_numpy(), df[["mx", "my", "mz"]].to_numpy())


def load_imu(path: str) -> TimeSeries:
    """IMU samples as (N, 6): gyro (rad/s) followed by accelerometer (m/s²)."""
    df = load_csv(path, "imu")
    return TimeSeries(df["t_s"].to_numpy(), df[SCHEMAS["imu"][1:]].to_numpy())


def load_motor_rates(path: str) -> TimeSeries:
    df = load_csv(path, "motor_rates")
    return TimeSeries(df["t_s"].to_numpy(), df[["r1", "r2", "r3", "r4"]].to_numpy())


def load_trajectory(path: str, source: str = "gnss") -> Trajectory:
    df = load_csv(path, "trajectory")
    quats = df[["qw", "qx", "qy", "qz"]].to_numpy()
    rotations = np.array([quaternion_to_rotation(q) for q in quats]).reshape(-1, 3, 3)
    return Trajectory(df["t_s"].to_numpy(), rotations, df[["px", "py", "pz"]].to_numpy(), source=source)


def load_markers(path: str) -> List[MarkerObservation]:
    df = load_csv(path, "markers", strict_time=False)
    observations = []
    for row in df.itertuples(index=False):
        pose = Pose.from_quaternion([row.qw, row.qx, row.qy, row.qz], [row.tx, row.ty, row.tz])
        observations.append(MarkerObservation(int(row.image_id), int(row.marker_id), pose, float(row.t_s)))
    return observations


def load_table(path: str, schema: str) -> np.ndarray:
    """Two-column table (``rpm_table`` or ``resonance_table``) as an (N, 2) array."""
    return load_csv(path, schema)[SCHEMAS[schema]].to_numpy()


def load_marker_field(path: str, main_marker: int = 0) -> MarkerFieldCalibration:
    df = load_csv(path, "marker_field")
    poses = {
        int(row.marker_id): Pose.from_quaternion([row.qw, row.qx, row.qy, row.qz], [row.tx, row.ty, row.tz])
        for row in df.itertuples(index=False)
    }
    return MarkerFieldCalibration(main_marker, poses)


def write_frame(path: str, columns: Mapping[str, Sequence]) -> str:
    """Write columns in the given order; floats use the shortest round-trip representation."""
    pd.DataFrame(dict(columns)).to_csv(path, index=False)
    return path


def _quaternions(rotations: np.ndarray) -> np.ndarray:
    return np.array([rotation_to_quaternion(R) for R in rotations]).reshape(-1, 4)


def write_trajectory(path: str, trajectory: Trajectory) -> str:
    q = _quaternions(trajectory.rotations)
    p = trajectory.positions
    return write_frame(
        path,
        {
            "t_s": trajectory.t,
            "px": p[:, 0], "py": p[:, 1], "pz": p[:, 2],
            "qw": q[:, 0], "qx": q[:, 1], "qy": q[:, 2], "qz": q[:, 3],
        },
    )


def write_gnss(path: str, gnss: GnssSeries) -> str:
    return write_frame(
        path,
        {
            "t_s": gnss.t,
            "east_m": gnss.positions[:, 0], "north_m": gnss.positions[:, 1], "up_m": gnss.positions[:, 2],
            "fix": [f.value for f in gnss.fix],
            "var_e": gnss.cov[:, 0], "var_n": gnss.cov[:, 1], "var_u": gnss.cov[:, 2],
        },
    )


def write_series(path: str, series: TimeSeries, schema: str) -> str:
    names = SCHEMAS[schema]
    values = series.values.reshape(len(series), -1)
    if values.shape[1] != len(names) - 1:
        raise ValueError(f"{schema} needs {len(names) - 1} value columns, got {values.shape[1]}")
    columns = {"t_s": series.t}
    columns.update({name: values[:, k] for k, name in enumerate(names[1:])})
    return write_frame(path, columns)


def write_markers(path: str, observations: Sequence[MarkerObservation]) -> str:
    q = _quaternions(np.array([o.pose.rotation for o in observations]))
    t = np.array([o.pose.translation for o in observations]).reshape(-1, 3)
    return write_frame(
        path,
        {
            "t_s": [o.t if o.t is not None else 0.0 for o in observations],
            "image_id": [o.image_id for o in observations],
            "marker_id": [o.marker_id for o in observations],
            "qw": q[:, 0], "qx": q[:, 1], "qy": q[:, 2], "qz": q[:, 3],
            "tx": t[:, 0], "ty": t[:, 1], "tz": t[:, 2],
        },
    )


def write_marker_field(path: str, field: MarkerFieldCalibration) -> str:
    ids = sorted(field.poses)
    q = _quaternions(np.array([field.poses[k].rotation for k in ids]))
    t = np.array([field.poses[k].translation for k in ids]).reshape(-1, 3)
    return write_frame(
        path,
        {
            "marker_id": ids,
            "qw": q[:, 0], "qx": q[:, 1], "qy": q[:, 2], "qz": q[:, 3],
            "tx": t[:, 0], "ty": t[:, 1], "tz": t[:, 2],
        },
    )


def write_table(path: str, table: np.ndarray, schema: str, extra: Optional[Dict[str, Sequence]] = None) -> str:
    names = SCHEMAS[schema]
    columns = {name: np.asarray(table)[:, k] for k, name in enumerate(names)}
    columns.update(extra or {})
    return write_frame(path, columns)
