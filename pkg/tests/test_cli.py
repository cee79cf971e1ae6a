import json

import numpy as np
import pytest
import yaml

from groundtruth import __version__, io_handling
from groundtruth.attitude import WorldMagneticModel
from groundtruth.cli_tools import commands
from groundtruth.cli_tools.gt import main
from groundtruth.geometry import rot_x, rot_z
from groundtruth.synthetic import ellipsoid_samples, vibration_signal
from groundtruth.timeseries import TimeSeries

from conftest import static_session


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    """No configuration file is picked up from the environment, home or working directory."""
    monkeypatch.delenv("GT_TOOLS_CFG", raising=False)
    monkeypatch.delenv("GT_LOG_LEVEL", raising=False)
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def flight_files(fixture_dir, tmp_path):
    out, paths, flight = fixture_dir
    cfg = tmp_path / "flight.yml"
    cfg.write_text(yaml.safe_dump(flight.config))
    return paths, str(cfg)


def solve_args(paths, cfg, out):
    return [
        "solve",
        "--gnss1", paths["gnss1"],
        "--gnss2", paths["gnss2"],
        "--mag", paths["mag"],
        "--imu", paths["imu"],
        "--config", cfg,
        "--out", str(out),
    ]


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_version(capsys):
    assert main(["--version"]) == 0
    assert f"gt v{__version__}" in capsys.readouterr().out


def test_usage_errors():
    assert main([]) == 2
    assert main(["fly"]) == 2
    assert main(["magcal"]) == 2
    assert main(["solve", "--gnss1", "a.csv"]) == 2


def test_help_exits_cleanly():
    assert main(["--help"]) == 0


def test_solve(flight_files, tmp_path):
    paths, cfg = flight_files
    out = tmp_path / "run"
    assert main(solve_args(paths, cfg, out)) == 0
    trajectory = io_handling.load_trajectory(str(out / "trajectory.csv"))
    truth = io_handling.load_trajectory(paths["truth"])
    assert len(trajectory) == len(truth)
    report = read_json(out / "report.json")
    assert report["offsets"]["gnss2"]["delta_s"] == pytest.approx(0.12, abs=0.01)
    assert report["config"]["attitude"]["method"] == "wahba"


def test_solve_is_deterministic(flight_files, tmp_path):
    paths, cfg = flight_files
    for run in ("a", "b"):
        assert main(solve_args(paths, cfg, tmp_path / run) + ["--method", "tangent"]) == 0
    for name in ("trajectory.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unknown_method_is_a_usage_error(flight_files, tmp_path):
    paths, cfg = flight_files
    assert main(solve_args(paths, cfg, tmp_path) + ["--method", "quest"]) == 2


def test_bad_config(flight_files, tmp_path):
    paths, _ = flight_files
    bad = tmp_path / "bad.yml"
    bad.write_text("attitude:\n  bogus: 1\n")
    assert main(solve_args(paths, str(bad), tmp_path)) == 2


def test_bad_data(flight_files, tmp_path):
    paths, cfg = flight_files
    broken = tmp_path / "gnss1.csv"
    broken.write_text("t_s,east_m,north_m,up_m,fix,var_e,var_n,var_u\n0,1,2,x,fixed,0,0,0\n")
    assert main(solve_args({**paths, "gnss1": str(broken)}, cfg, tmp_path)) == 1


def test_missing_input_file(flight_files, tmp_path):
    paths, cfg = flight_files
    assert main(solve_args({**paths, "mag": str(tmp_path / "absent.csv")}, cfg, tmp_path)) == 2


def test_timesync(flight_files, tmp_path):
    paths, cfg = flight_files
    args = [
        "timesync",
        "--gnss1", paths["gnss1"],
        "--gnss2", paths["gnss2"],
        "--mag", paths["mag"],
        "--imu", paths["imu"],
        "--trajectory", paths["truth"],
        "--config", cfg,
        "--out", str(tmp_path),
    ]
    assert main(args) == 0
    offsets = read_json(tmp_path / "offsets.json")["offsets"]
    assert offsets["gnss2"]["delta_s"] == pytest.approx(0.12, abs=0.01)
    assert offsets["mag"]["delta_s"] == pytest.approx(0.08, abs=0.01)
    assert offsets["imu"]["delta_s"] == pytest.approx(0.05, abs=0.01)


def test_align(flight_files, tmp_path):
    paths, _ = flight_files
    truth = io_handling.load_trajectory(paths["truth"])
    R, t = rot_z(0.5), np.array([2.0, -1.0, 0.3])
    local = truth.window(10.0, 20.0).transformed(R.T, -R.T @ t)
    transition = io_handling.write_trajectory(str(tmp_path / "transition.csv"), local)
    assert main(["align", "--outdoor", paths["truth"], "--transition", transition, "--out", str(tmp_path)]) == 0
    result = read_json(tmp_path / "alignment.json")
    assert result["rms_residual"] < 1e-6
    assert np.allclose(result["translation"], t, atol=1e-6)
    stitched = io_handling.load_trajectory(str(tmp_path / "stitched.csv"))
    assert np.allclose(stitched.positions, truth.positions, atol=1e-6)


def test_align_needs_pairs(flight_files, tmp_path):
    paths, _ = flight_files
    args = ["align", "--outdoor", paths["truth"], "--outdoor", paths["truth"], "--transition", paths["truth"]]
    assert main(args) == 2


def test_magcal_intrinsic(tmp_path):
    samples = ellipsoid_samples(n=800)
    mag = io_handling.write_series(
        str(tmp_path / "mag.csv"), TimeSeries(np.arange(len(samples)) * 0.0125, samples), "mag"
    )
    assert main(["magcal", "intrinsic", "--mag", mag, "--out", str(tmp_path)]) == 0
    result = read_json(tmp_path / "mag_intrinsics.json")
    assert np.allclose(result["offset"], [0.1, -0.2, 0.05], atol=1e-6)
    assert result["norm_cv"] < 1e-5


def test_magcal_extrinsic(tmp_path):
    R_I_M = rot_z(np.radians(10.0)) @ rot_x(np.radians(5.0))
    imu, mag = static_session(R_I_M, WorldMagneticModel.from_degrees(4.15, 63.13))
    args = [
        "magcal", "extrinsic",
        "--imu", io_handling.write_series(str(tmp_path / "imu.csv"), imu, "imu"),
        "--mag", io_handling.write_series(str(tmp_path / "mag.csv"), mag, "mag"),
        "--out", str(tmp_path),
    ]
    assert main(args) == 0
    result = read_json(tmp_path / "mag_extrinsics.json")
    assert result["inclination_deg"] == pytest.approx(63.13, abs=0.01)
    assert result["static_poses"] == 6


def test_markercal(flight_files, tmp_path):
    paths, _ = flight_files
    assert main(["markercal", "--markers", paths["markers"], "--out", str(tmp_path)]) == 0
    field = io_handling.load_marker_field(str(tmp_path / "marker_field.csv"))
    assert sorted(field.poses) == list(range(20))
    assert read_json(tmp_path / "marker_report.json")["disconnected"] == []
    assert (tmp_path / "marker_trajectory.csv").exists()


@pytest.fixture
def vibration_imu(tmp_path):
    return io_handling.write_series(str(tmp_path / "vib.csv"), vibration_signal(duration=10.0), "imu")


def test_vibration_psd(vibration_imu, tmp_path):
    args = ["vibration", "psd", "--imu", vibration_imu, "--spectrogram", "--out", str(tmp_path)]
    assert main(args) == 0
    assert read_json(tmp_path / "psd.json")["main_peak_hz"] == pytest.approx(100.0, abs=0.5)
    assert (tmp_path / "psd.csv").exists()
    assert (tmp_path / "spectrogram.csv").exists()


def test_vibration_allan(vibration_imu, tmp_path):
    args = ["vibration", "allan", "--imu", vibration_imu, "--channel", "gz", "--out", str(tmp_path)]
    assert main(args) == 0
    result = read_json(tmp_path / "allan.json")
    assert result["channel"] == "gz"
    assert result["white_noise"] > 0.0


def test_rpmfit_is_deterministic(flight_files, tmp_path):
    paths, _ = flight_files
    for run in ("a", "b"):
        assert main(["vibration", "rpmfit", "--table", paths["rpm_table"], "--out", str(tmp_path / run)]) == 0
    result = read_json(tmp_path / "a" / "rpm_fit.json")
    assert result["max_rel_error"] < 0.02
    assert result["configured_max_rel_error"] < 0.02
    for name in ("rpm_fit.csv", "rpm_fit.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_vibration_predict(tmp_path, capsys):
    assert main(["vibration", "predict", "--rpm", "9000", "15500", "--json", "--out", str(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["resonance prediction [Hz]"]["9000 rpm"] == pytest.approx(155.5666, abs=1e-3)
    table = io_handling.load_table(str(tmp_path / "resonances.csv"), "resonance_table")
    assert np.allclose(table[:, 1], [155.5666, 260.2166], atol=1e-3)


def test_vibration_predict_needs_a_source():
    assert main(["vibration", "predict"]) == 2


def test_synth_then_solve(tmp_path):
    out = tmp_path / "synth"
    assert main(["synth", "--duration", "20", "--seed", "3", "--out", str(out)]) == 0
    for name in ("gnss1.csv", "gnss2.csv", "mag.csv", "imu.csv", "truth.csv", "markers.csv", "gt.yml"):
        assert (out / name).exists()
    paths = {name: str(out / f"{name}.csv") for name in ("gnss1", "gnss2", "mag", "imu")}
    assert main(solve_args(paths, str(out / "gt.yml"), tmp_path / "solved")) == 0


@pytest.fixture
def command_inputs(flight_files, vibration_imu, tmp_path):
    """Inputs for every subcommand, written once and shared by repeated runs."""
    paths, cfg = flight_files
    inputs = tmp_path / "inputs"
    inputs.mkdir()
    truth = io_handling.load_trajectory(paths["truth"])
    R, t = rot_z(0.5), np.array([2.0, -1.0, 0.3])
    samples = ellipsoid_samples(n=800)
    R_I_M = rot_z(np.radians(10.0)) @ rot_x(np.radians(5.0))
    imu, mag = static_session(R_I_M, WorldMagneticModel.from_degrees(4.15, 63.13))
    markers_cfg = inputs / "markers.yml"
    markers_cfg.write_text(yaml.safe_dump({"markers": {"seed": 5, "n_paths": 16}, "workers": {"max_workers": 4}}))
    return {
        **paths,
        "config": cfg,
        "markers_config": str(markers_cfg),
        "vib": vibration_imu,
        "transition": io_handling.write_trajectory(
            str(inputs / "transition.csv"), truth.window(10.0, 20.0).transformed(R.T, -R.T @ t)
        ),
        "ellipsoid": io_handling.write_series(
            str(inputs / "ellipsoid.csv"), TimeSeries(np.arange(len(samples)) * 0.0125, samples), "mag"
        ),
        "static_imu": io_handling.write_series(str(inputs / "static_imu.csv"), imu, "imu"),
        "static_mag": io_handling.write_series(str(inputs / "static_mag.csv"), mag, "mag"),
    }


REPEATABLE_COMMANDS = {
    "timesync": (
        lambda p: [
            "timesync", "--gnss1", p["gnss1"], "--gnss2", p["gnss2"], "--mag", p["mag"],
            "--imu", p["imu"], "--trajectory", p["truth"], "--config", p["config"],
        ],
        ["offsets.json"],
    ),
    "align": (
        lambda p: ["align", "--outdoor", p["truth"], "--transition", p["transition"]],
        ["alignment.json", "stitched.csv"],
    ),
    "magcal intrinsic": (
        lambda p: ["magcal", "intrinsic", "--mag", p["ellipsoid"]],
        ["mag_intrinsics.json"],
    ),
    "magcal extrinsic": (
        lambda p: ["magcal", "extrinsic", "--imu", p["static_imu"], "--mag", p["static_mag"]],
        ["mag_extrinsics.json"],
    ),
    "markercal": (
        lambda p: ["markercal", "--markers", p["markers"], "--config", p["markers_config"]],
        ["marker_field.csv", "marker_trajectory.csv", "marker_report.json"],
    ),
    "vibration psd": (
        lambda p: ["vibration", "psd", "--imu", p["vib"], "--spectrogram"],
        ["psd.csv", "psd.json", "spectrogram.csv"],
    ),
    "vibration predict": (
        lambda p: ["vibration", "predict", "--rpm", "9000", "12000", "15500"],
        ["resonances.csv"],
    ),
    "vibration allan": (
        lambda p: ["vibration", "allan", "--imu", p["vib"], "--channel", "ax"],
        ["allan.csv", "allan.json"],
    ),
}


@pytest.mark.parametrize("command", sorted(REPEATABLE_COMMANDS))
def test_repeated_runs_are_byte_identical(command, command_inputs, tmp_path):
    build, outputs = REPEATABLE_COMMANDS[command]
    for run in ("a", "b"):
        assert main(build(command_inputs) + ["--out", str(tmp_path / run)]) == 0
    for name in outputs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_negative_gnss_variance_is_a_data_error(flight_files, tmp_path):
    paths, cfg = flight_files
    lines = open(paths["gnss1"], encoding="utf-8").read().splitlines()
    header = lines[0].split(",")
    row = lines[3].split(",")
    row[header.index("var_e")] = "-1"
    lines[3] = ",".join(row)
    broken = tmp_path / "gnss1.csv"
    broken.write_text("\n".join(lines) + "\n")
    assert main(solve_args({**paths, "gnss1": str(broken)}, cfg, tmp_path / "out")) == 1


def test_median_tolerance_from_config(flight_files, tmp_path, monkeypatch):
    paths, _ = flight_files
    seen = []
    calibrate = commands.calibrate_field

    def recording_calibrate(*args, **kwargs):
        seen.append(kwargs["median_tol"])
        return calibrate(*args, **kwargs)

    monkeypatch.setattr(commands, "calibrate_field", recording_calibrate)
    cfg = tmp_path / "tol.yml"
    cfg.write_text("tolerances.median: 1.0e-6\n")
    assert main(["markercal", "--markers", paths["markers"], "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert seen == [1.0e-6]


def test_rejected_values_are_data_errors(command_inputs, tmp_path):
    cfg = tmp_path / "unit.yml"
    cfg.write_text("tolerances:\n  unit: 2.0\n")
    args = ["magcal", "extrinsic", "--imu", command_inputs["static_imu"], "--mag", command_inputs["static_mag"]]
    assert main(args + ["--config", str(cfg), "--out", str(tmp_path / "out")]) == 1
