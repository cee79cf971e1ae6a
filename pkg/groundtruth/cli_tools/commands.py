"""One function per ``gt`` subcommand: load inputs, run the library, write outputs, summarize."""

from dataclasses import asdict
from typing import Any, Callable, Dict

import numpy as np
import yaml

from groundtruth import io_handling, log
from groundtruth.alignment import RigidAlignment, align_segments, stitch_trajectory
from groundtruth.attitude import solver_dispatcher
from groundtruth.cli_tools.helpers import obtain_dataset, out_path
from groundtruth.config import PipelineConfig
from groundtruth.exceptions import ConfigInvalidException, NoPeak
from groundtruth.geometry import rotation_to_quaternion
from groundtruth.magnetometer import build_static_orientation_set, estimate_extrinsics, fit_ellipsoid
from groundtruth.markers import calibrate_field, extract_pairwise, marker_trajectory
from groundtruth.pipeline import filter_fix, run_ground_truth, synchronize
from groundtruth.report import CalibrationReport, write_report
from groundtruth.synthetic import simulate_flight, write_fixtures
from groundtruth.timesync import sync_imu_to_gt
from groundtruth.vibration import (
    ResonanceModel,
    RpmCalibration,
    UniformSignal,
    acceleration_norm,
    allan_deviation,
    allan_noise_parameters,
    default_taus,
    find_main_peak,
    fit_rate_to_rpm,
    fit_resonance_line,
    predict_resonance_frequency,
    predict_resonances,
    spectrogram,
    welch_psd,
)

Summary = Dict[str, Any]


def run_solve(cli_args, cfg: PipelineConfig) -> Summary:
    if cli_args.method:
        try:
            solver_dispatcher(cli_args.method)
        except ValueError as err:
            raise ConfigInvalidException(str(err))
        cfg.attitude.method = cli_args.method.lower()
    ds = obtain_dataset(cli_args)
    trajectory, report = run_ground_truth(ds, cfg)
    io_handling.write_trajectory(out_path(cli_args, "trajectory.csv"), trajectory)
    write_report(out_path(cli_args, "report.json"), report)
    return {
        "ground truth": {
            "method": cfg.attitude.method,
            **report.results["epochs"],
            **{f"offset {name} [s]": o["delta_s"] for name, o in report.offsets.items()},
        }
    }


def run_timesync(cli_args, cfg: PipelineConfig) -> Summary:
    ds = obtain_dataset(cli_args)
    ds.require("gnss1", "gnss2", "mag")
    report = CalibrationReport(config=cfg.to_dict())
    g1 = filter_fix(ds.gnss1, cfg, "gnss1", report)
    g2 = filter_fix(ds.gnss2, cfg, "gnss2", report)
    synchronize(g1, g2, ds.mag, cfg, report)
    if cli_args.trajectory and ds.imu is not None:
        trajectory = io_handling.load_trajectory(cli_args.trajectory)
        report.add_offset("imu", sync_imu_to_gt(trajectory, ds.imu, cfg.timesync.max_lag))
    elif ds.imu is not None:
        report.flag("IMU offset needs --trajectory")
    write_report(out_path(cli_args, "offsets.json"), report)
    return {"offsets [s]": {name: o["delta_s"] for name, o in report.offsets.items()}}


def run_align(cli_args, cfg: PipelineConfig) -> Summary:
    outdoors = [io_handling.load_trajectory(p, source="gnss") for p in cli_args.outdoor]
    transitions = [io_handling.load_trajectory(p, source=cli_args.source) for p in cli_args.transition]
    alignment = align_segments(
        outdoors,
        transitions,
        overlap_window=cfg.alignment.overlap_window,
        max_gap=cfg.alignment.max_gap,
    )
    segments = outdoors + transitions
    alignments = [RigidAlignment.identity()] * (len(outdoors) - 1) + [alignment] * len(transitions)
    stitched = stitch_trajectory(segments, alignments, cfg.segments.priority)
    io_handling.write_trajectory(out_path(cli_args, "stitched.csv"), stitched)
    result = {
        "q_wxyz": rotation_to_quaternion(alignment.rotation),
        "translation": alignment.translation,
        "rms_residual": alignment.rms_residual,
        "n_pairs": alignment.n_pairs,
        "weighted": alignment.weighted,
        "stitched_samples": len(stitched),
    }
    write_report(out_path(cli_args, "alignment.json"), result)
    return {"alignment": result}


def run_magcal_intrinsic(cli_args, cfg: PipelineConfig) -> Summary:
    mag = io_handling.load_mag(cli_args.mag)
    cal = fit_ellipsoid(mag.values)
    norms = np.linalg.norm(cal.correct_many(mag.values), axis=1)
    result = {
        "offset": cal.offset,
        "matrix": cal.matrix,
        "norm_cv": float(norms.std() / norms.mean()),
        "samples": len(mag),
    }
    write_report(out_path(cli_args, "mag_intrinsics.json"), result)
    return {"magnetometer intrinsics": result}


def run_magcal_extrinsic(cli_args, cfg: PipelineConfig) -> Summary:
    imu = io_handling.load_imu(cli_args.imu)
    mag = io_handling.load_mag(cli_args.mag)
    data = build_static_orientation_set(
        imu,
        mag,
        cfg.magnetometer.calibration(),
        gyro_threshold=cfg.static.gyro_threshold,
        min_duration=cfg.static.min_duration,
        unit_tol=cfg.tolerances.unit,
    )
    ext = estimate_extrinsics(data, step_tol=cfg.tolerances.gn_step, max_iter=cfg.tolerances.gn_max_iter)
    result = {
        "q_I_M": rotation_to_quaternion(ext.R_I_M),
        "inclination_deg": float(np.degrees(ext.inclination)),
        "residual": ext.residual,
        "static_poses": len(data),
    }
    write_report(out_path(cli_args, "mag_extrinsics.json"), result)
    return {"magnetometer extrinsics": result}


def run_markercal(cli_args, cfg: PipelineConfig) -> Summary:
    observations = io_handling.load_markers(cli_args.markers)
    pairwise = extract_pairwise(observations)
    m = cfg.markers
    field = calibrate_field(
        pairwise,
        main=m.main_marker,
        n_paths=m.n_paths,
        seed=m.seed,
        path_penalty=m.path_penalty,
        path_jitter=m.path_jitter,
        markers={o.marker_id for o in observations},
        strict=cli_args.strict,
        max_workers=cfg.workers.max_workers,
        median_tol=cfg.tolerances.median,
    )
    io_handling.write_marker_field(out_path(cli_args, "marker_field.csv"), field)
    trajectory = marker_trajectory(observations, field)
    if len(trajectory):
        io_handling.write_trajectory(out_path(cli_args, "marker_trajectory.csv"), trajectory)
    result = {
        "main_marker": field.main_marker,
        "markers": len(field.poses),
        "pairs": len(pairwise),
        "disconnected": field.disconnected,
    }
    write_report(out_path(cli_args, "marker_report.json"), result)
    return {"marker field": result}


def run_vibration_psd(cli_args, cfg: PipelineConfig) -> Summary:
    imu = io_handling.load_imu(cli_args.imu)
    sig = acceleration_norm(imu, cli_args.rate)
    window_len = int(round(cfg.vibration.window_s * sig.sample_rate))
    spec = welch_psd(sig, window_len, cfg.vibration.overlap)
    io_handling.write_frame(out_path(cli_args, "psd.csv"), {"freq_hz": spec.freqs, "psd": spec.power})
    try:
        peak = find_main_peak(spec, cfg.vibration.min_freq)
    except NoPeak as err:
        log.warning(str(err))
        peak = None
    if cli_args.spectrogram:
        sg = spectrogram(sig, window_len, cfg.vibration.overlap)
        times, freqs = np.meshgrid(sg.times, sg.freqs, indexing="ij")
        io_handling.write_frame(
            out_path(cli_args, "spectrogram.csv"),
            {"t_s": times.ravel(), "freq_hz": freqs.ravel(), "power": sg.power.T.ravel()},
        )
    result = {"sample_rate_hz": sig.sample_rate, "bins": len(spec.freqs), "main_peak_hz": peak}
    write_report(out_path(cli_args, "psd.json"), result)
    return {"power spectral density": result}


def run_vibration_rpmfit(cli_args, cfg: PipelineConfig) -> Summary:
    table = io_handling.load_table(cli_args.table, "rpm_table")
    rate, rpm = table[:, 0], table[:, 1]
    cal = fit_rate_to_rpm(table)
    configured = RpmCalibration(*cfg.vibration.rpm_coefficients)
    fit_error = np.abs(cal.predict(rate) - rpm) / rpm
    cfg_error = np.abs(configured.predict(rate) - rpm) / rpm
    io_handling.write_table(
        out_path(cli_args, "rpm_fit.csv"),
        table,
        "rpm_table",
        extra={"rpm_fit": cal.predict(rate), "rel_error": fit_error},
    )
    result: Dict[str, Any] = {
        "rpm_coefficients": cal.as_list(),
        "max_rel_error": float(fit_error.max()),
        "configured_max_rel_error": float(cfg_error.max()),
    }
    if cli_args.resonance_table:
        model = fit_resonance_line(io_handling.load_table(cli_args.resonance_table, "resonance_table"))
        result["resonance_coefficients"] = model.as_list()
    write_report(out_path(cli_args, "rpm_fit.json"), result)
    return {"rpm calibration": result}


def run_vibration_predict(cli_args, cfg: PipelineConfig) -> Summary:
    model = ResonanceModel(*cfg.vibration.resonance_coefficients)
    if cli_args.motor_rates:
        rates = io_handling.load_motor_rates(cli_args.motor_rates)
        cal = RpmCalibration(*cfg.vibration.rpm_coefficients)
        resonances = predict_resonances(model, cal, rates)
        io_handling.write_frame(
            out_path(cli_args, "resonances.csv"),
            {"t_s": resonances.t, **{f"f{k + 1}": resonances.values[:, k] for k in range(4)}},
        )
        result = {"samples": len(resonances), "mean_hz": resonances.values.mean(axis=0)}
    else:
        rpm = np.asarray(cli_args.rpm, dtype=float)
        freq = predict_resonance_frequency(model, rpm)
        io_handling.write_table(
            out_path(cli_args, "resonances.csv"), np.column_stack([rpm, freq]), "resonance_table"
        )
        result = {f"{r:g} rpm": float(f) for r, f in zip(rpm, freq)}
    return {"resonance prediction [Hz]": result}


def run_vibration_allan(cli_args, cfg: PipelineConfig) -> Summary:
    imu = io_handling.load_imu(cli_args.imu)
    column = io_handling.SCHEMAS["imu"].index(cli_args.channel) - 1
    sig = UniformSignal(imu.rate, imu.values[:, column], float(imu.t[0]))
    adev = allan_deviation(sig, default_taus(sig, cli_args.n_taus))
    noise = allan_noise_parameters(adev)
    io_handling.write_frame(out_path(cli_args, "allan.csv"), {"tau_s": adev.taus, "adev": adev.adev})
    result = {"channel": cli_args.channel, **asdict(noise)}
    write_report(out_path(cli_args, "allan.json"), result)
    return {"allan deviation": result}


def run_synth(cli_args, cfg: PipelineConfig) -> Summary:
    flight = simulate_flight(duration=cli_args.duration, gnss_noise=cli_args.gnss_noise, seed=cli_args.seed)
    paths = write_fixtures(cli_args.out, flight, seed=cli_args.seed)
    cfg_file = out_path(cli_args, "gt.yml")
    with open(cfg_file, "w", encoding="utf-8") as f:
        yaml.safe_dump(flight.config, f, sort_keys=True)
    paths["config"] = cfg_file
    return {"synthetic fixtures": paths}


COMMAND_MAPPER: Dict[str, Callable[[Any, PipelineConfig], Summary]] = {
    "solve": run_solve,
    "timesync": run_timesync,
    "align": run_align,
    "magcal intrinsic": run_magcal_intrinsic,
    "magcal extrinsic": run_magcal_extrinsic,
    "markercal": run_markercal,
    "vibration psd": run_vibration_psd,
    "vibration rpmfit": run_vibration_rpmfit,
    "vibration predict": run_vibration_predict,
    "vibration allan": run_vibration_allan,
    "synth": run_synth,
}
