"""Command-line front end: experiment dispatch and CSV emission.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 feasibility gate refused.
"""

from __future__ import annotations

import argparse
import math
import shutil
import sys
from pathlib import Path

import numpy as np

from . import gpe as gpe_mod
from . import protocol
from .config import EXPERIMENTS, RunConfig, load_config, serialize_config
from .dynamics import (
    MeanFieldState,
    integrate_mean_field,
    pulse_center,
    wea_propagate,
)
from .errors import ConfigError, FeasibilityRefused, NumericsError
from .medium import (
    group_velocity_with_decay,
    mixing_angle,
    transversal_rates,
    velocity_floor,
)
from .reports import (
    fmt_float,
    write_csv,
    write_curve_csv,
    write_manifest_csv,
    write_snapshots,
    write_storage_csv,
    write_summary_txt,
)


def _curve_grid(config: RunConfig) -> np.ndarray:
    return np.linspace(0.0, config.curve.t_end_us, config.curve.points)


def _substeps(config: RunConfig):
    return "auto" if config.run.substeps == 0 else config.run.substeps


def _write_gnuplot(outdir: Path, curve_files: list[str]) -> None:
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             "set xlabel 't (us)'", "set ylabel 'v_g / c'"]
    plots = ", ".join(f"'{name}' using 1:3 with lines" for name in curve_files)
    lines.append(f"plot {plots}")
    (outdir / "plot.gp").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_groupvel(config: RunConfig, outdir: Path) -> None:
    p = config.to_medium_params()
    sched = config.to_schedule()
    t = _curve_grid(config)
    omega = np.asarray(sched.omega(t), dtype=float)
    vg = protocol.velocity_curve(p, sched, t)
    write_curve_csv(outdir / "velocity_curve.csv", t, omega, vg / p.c)
    gamma1, gamma2 = transversal_rates(p)
    lines = [
        f"plateau_omega_rad_per_us = {fmt_float(sched.plateau)}",
        f"mixing_angle_at_plateau_rad = {fmt_float(mixing_angle(p, sched.plateau))}",
        f"vg_at_plateau_m_per_s = {fmt_float(group_velocity_with_decay(p, sched.plateau))}",
        f"gamma1_rad_per_us = {fmt_float(gamma1)}",
        f"gamma2_rad_per_us = {fmt_float(gamma2)}",
    ]
    if gamma1 * gamma2 > 0:
        floor = velocity_floor(p)
        lines.append(f"velocity_floor_m_per_s = {fmt_float(floor)}")
        lines.append(f"velocity_floor_km_per_s = {fmt_float(floor * 1e-3)}")
    else:
        lines.append("velocity_floor_m_per_s = none (no decay floor)")
    write_summary_txt(outdir / "summary.txt", lines)
    if config.run.gnuplot:
        _write_gnuplot(outdir, ["velocity_curve.csv"])


def _run_propagate(config: RunConfig, outdir: Path) -> None:
    p = config.to_medium_params()
    sched = config.to_schedule()
    grid = config.to_grid()
    pulse = config.to_pulse(grid)
    s0 = MeanFieldState.polariton_state(grid, p, pulse, float(sched.omega(0.0)))
    snaps = integrate_mean_field(
        s0, sched, p, grid,
        snapshot_stride=config.grid.snapshot_stride,
        substeps=_substeps(config), advection=config.run.advection,
    )
    write_snapshots(outdir, snaps,
                    {"E": "E", "phi_a": "phi_a", "phi_b": "phi_b",
                     "phi_e": "phi_e", "phi_g": "phi_g"})
    last = snaps[-1]
    oracle = wea_propagate(pulse, sched, p, last.t)
    travel_meas = pulse_center(grid.z, last.E) - pulse_center(grid.z, snaps[0].E)
    travel_pred = pulse_center(grid.z, oracle.samples) - config.pulse.center_um
    peak_meas = float(np.max(np.abs(last.E)) / np.max(np.abs(snaps[0].E)))
    theta0 = mixing_angle(p, float(sched.omega(0.0)))
    theta_t = mixing_angle(p, float(sched.omega(last.t)))
    peak_pred = math.cos(theta_t) / math.cos(theta0)
    write_summary_txt(outdir / "summary.txt", [
        f"t_end_us = {fmt_float(last.t)}",
        f"travel_measured_um = {fmt_float(travel_meas)}",
        f"travel_predicted_um = {fmt_float(travel_pred)}",
        f"peak_ratio_measured = {fmt_float(peak_meas)}",
        f"peak_ratio_predicted = {fmt_float(peak_pred)}",
    ])


def _run_store(config: RunConfig, outdir: Path) -> None:
    p = config.to_medium_params()
    sched = config.to_schedule()
    grid = config.to_grid()
    pulse = config.to_pulse(grid)
    report = protocol.run_storage_retrieval(
        p, sched, pulse, grid,
        force=config.run.force,
        substeps=_substeps(config),
        snapshot_stride=config.grid.snapshot_stride,
        advection=config.run.advection,
    )
    write_storage_csv(outdir / "storage_report.csv",
                      report.profiles["z_um"], report.profiles["e_in"],
                      report.profiles["phig_stored"], report.profiles["e_out"])
    report.write_series_csv(outdir / "velocity_curve.csv",
                            ["t_us", "omega_rad_per_us", "vg_over_c"])
    write_snapshots(outdir / "snapshots", report.snapshots,
                    {"E": "E", "phi_g": "phi_g"})
    write_summary_txt(outdir / "summary.txt", report.summary_lines())


def _run_imbalance(config: RunConfig, outdir: Path) -> None:
    p = config.to_medium_params()
    sched = config.to_schedule()
    reports = protocol.imbalance_sweep(
        config.sweep.n_total, config.sweep.etas, sched, p,
        t_grid=_curve_grid(config))
    rows = []
    summary = []
    for i, rep in enumerate(reports):
        fname = f"curve_eta{i:02d}.csv"
        rep.write_series_csv(outdir / fname,
                             ["t_us", "omega_rad_per_us", "vg_over_c"])
        rows.append((f"eta{i:02d}", fmt_float(rep.params["eta"]), fname))
        summary.append(f"min_vg_over_c_eta{i:02d} = "
                       f"{fmt_float(rep.scalars['min_vg_over_c'])} "
                       f"(eta = {fmt_float(rep.params['eta'])})")
    write_manifest_csv(outdir / "manifest.csv", rows)
    write_summary_txt(outdir / "summary.txt", summary)
    if config.run.gnuplot:
        _write_gnuplot(outdir, [r[2] for r in rows])


def _run_mediums(config: RunConfig, outdir: Path) -> None:
    p = config.to_medium_params()
    sched = config.to_schedule()
    kinds = config.sweep_kinds()
    n_scan = np.logspace(math.log10(config.sweep.n_scan_min),
                         math.log10(config.sweep.n_scan_max),
                         config.sweep.n_scan_points)
    reports = protocol.medium_comparison(
        config.sweep.n_total, kinds, sched, p,
        t_grid=_curve_grid(config), n_scan=n_scan)
    rows = []
    summary = []
    for rep in reports:
        kind = rep.params["medium_kind"]
        fname = f"curve_{kind}.csv"
        rep.write_series_csv(outdir / fname,
                             ["t_us", "omega_rad_per_us", "vg_over_c"])
        rows.append((kind, kind, fname))
        summary.append(f"scaling_exponent_{kind.replace('-', '_')} = "
                       f"{fmt_float(rep.scalars['scaling_exponent'])}")
    write_manifest_csv(outdir / "manifest.csv", rows)
    write_summary_txt(outdir / "summary.txt", summary)
    if config.run.gnuplot:
        _write_gnuplot(outdir, [r[2] for r in rows])


def _run_feasibility(config: RunConfig, outdir: Path) -> None:
    p = config.to_medium_params()
    sched = config.to_schedule()
    rep = protocol.feasibility_check(
        p, config.feasibility.t_s_us, sched, config.feasibility.t_storage_us,
        threshold=config.feasibility.threshold)
    gamma1, _ = transversal_rates(p)
    lines = []
    if gamma1 > 0:
        lines.append(f"gamma1_inverse_ms = {fmt_float(1e-3 / gamma1)}")
    lines.extend(rep.summary_lines())
    lines.append(f"all_ok = {'true' if rep.all_ok else 'false'}")
    write_summary_txt(outdir / "summary.txt", lines)
    names = sorted(rep.margins)
    write_csv(outdir / "feasibility.csv",
              ["margin_" + n for n in names],
              [np.array([rep.margins[n]]) for n in names])


def _write_frames(outdir: Path, frames) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, wf in enumerate(frames):
        fname = f"frame_{i:05d}.csv"
        write_csv(outdir / fname, ["z_um", "density", "phase"],
                  [wf.z, wf.density(), np.angle(wf.psi)])
        rows.append(f"{i},{fmt_float(wf.t)},{fname}")
    (outdir / "frames.csv").write_text(
        "\n".join(["index,t_us,file"] + rows) + "\n", encoding="utf-8")


def _write_trajectories(path: Path, trajectories) -> None:
    lines = ["t_us,dip_index,z_um,speed_um_per_us"]
    for idx, tr in enumerate(trajectories):
        t = np.asarray(tr.times)
        x = np.asarray(tr.positions)
        speed = np.gradient(x, t) if len(t) > 1 else np.zeros_like(x)
        for j in range(len(t)):
            lines.append(f"{fmt_float(t[j])},{idx},{fmt_float(x[j])},{fmt_float(speed[j])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_gpe_soliton(config: RunConfig, outdir: Path) -> None:
    p = config.to_gpe_params()
    grid = config.to_gpe_grid()
    kw = config.to_soliton_spec_kwargs()
    alpha = gpe_mod.healing_alpha(p)
    # evolve a zero-winding pair: the configured soliton plus a receding
    # opposite-direction partner, so the state fits the periodic grid
    quarter_span = 0.25 * (grid.z_max - grid.z_min)
    spec = gpe_mod.SolitonSpec(q=kw["q"], z0=kw["z0"], direction=kw["direction"],
                               alpha=alpha)
    partner = gpe_mod.SolitonSpec(
        q=kw["q"], z0=kw["z0"] - kw["direction"] * quarter_span,
        direction=-kw["direction"], alpha=alpha)
    wf0 = gpe_mod.soliton_product([spec, partner], p, grid)
    frames = gpe_mod.split_step_evolve(
        wf0, p, grid,
        snapshot_stride=config.gpegrid.snapshot_stride,
        nonlinearity=config.gpe.nonlinearity,
        background_decay_rate=config.gpe.background_decay_per_us,
    )
    _write_frames(outdir / "frames", frames)
    trajectories = gpe_mod.track_minima(
        frames, background_density=p.background_amp**2)
    _write_trajectories(outdir / "trajectory.csv", trajectories)
    v_s = gpe_mod.sound_speed(p)
    v_expected = spec.speed(v_s)
    main_track = min(
        (tr for tr in trajectories if len(tr) >= 2),
        key=lambda tr: abs(tr.positions[0] - kw["z0"]), default=None)
    lines = [
        f"q = {fmt_float(kw['q'])}",
        f"sound_speed_um_per_us = {fmt_float(v_s)}",
        f"expected_speed_um_per_us = {fmt_float(v_expected)}",
        f"norm_initial = {fmt_float(frames[0].norm())}",
        f"norm_final = {fmt_float(frames[-1].norm())}",
        f"min_density_final = {fmt_float(float(frames[-1].density().min()))}",
        f"expected_min_density = {fmt_float((1.0 - kw['q']**2) * p.background_amp**2)}",
    ]
    if main_track is not None and len(main_track) > 2:
        lines.append(f"measured_speed_um_per_us = {fmt_float(main_track.fit_speed())}")
    write_summary_txt(outdir / "summary.txt", lines)


def _run_gpe_split(config: RunConfig, outdir: Path) -> None:
    p = config.to_gpe_params()
    grid = config.to_gpe_grid()
    report = gpe_mod.soliton_split_experiment(
        config.soliton.q, p, grid,
        z0=config.soliton.z0_um,
        seed_separation_widths=config.soliton.seed_separation_widths,
        snapshot_stride=config.gpegrid.snapshot_stride,
        background_decay_rate=config.gpe.background_decay_per_us,
    )
    if report.series:
        report.write_series_csv(outdir / "separation.csv",
                                ["t_us", "z_left_um", "z_right_um", "separation_um"])
        t = report.series["t_us"]
        lines = ["t_us,dip_index,z_um,speed_um_per_us"]
        for idx, col in ((0, "z_left_um"), (1, "z_right_um")):
            x = report.series[col]
            speed = np.gradient(x, t)
            for j in range(len(t)):
                lines.append(f"{fmt_float(t[j])},{idx},{fmt_float(x[j])},"
                             f"{fmt_float(speed[j])}")
        (outdir / "trajectory.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_summary_txt(outdir / "summary.txt", report.summary_lines())
    if not report.scalars.get("succeeded"):
        raise NumericsError("soliton splitting did not produce two persistent dips; "
                            "see summary.txt for diagnostics")


_RUNNERS = {
    "groupvel": _run_groupvel,
    "propagate": _run_propagate,
    "store": _run_store,
    "imbalance": _run_imbalance,
    "mediums": _run_mediums,
    "feasibility": _run_feasibility,
    "gpe-soliton": _run_gpe_soliton,
    "gpe-split": _run_gpe_split,
}


def run(config: RunConfig, out_dir: str | Path) -> None:
    """Execute the configured experiment, writing outputs atomically.

    Results appear at ``out_dir`` only if the whole experiment succeeds;
    partial outputs are cleaned up on failure.
    """
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()):
        raise ConfigError(f"output directory {out_dir} already exists and is not empty")
    tmp = out_dir.parent / (out_dir.name + ".partial")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)
    try:
        (tmp / "config.txt").write_text(serialize_config(config), encoding="utf-8")
        _RUNNERS[config.experiment](config, tmp)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if out_dir.exists():
        out_dir.rmdir()
    tmp.rename(out_dir)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowmol",
        description="Slow light, optical storage and gray solitons in an "
                    "atom-molecule medium",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", type=str, default=None,
                        help="key-value configuration file")
        sp.add_argument("--out", type=str, required=True,
                        help="output directory (must not already contain results)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a single configuration key (repeatable)")
        sp.add_argument("--force", action="store_true",
                        help="bypass the feasibility gate")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = list(args.set) + [f"experiment={args.experiment}"]
        if args.force:
            overrides.append("run.force=true")
        config = load_config(args.config, overrides)
        run(config, args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FeasibilityRefused as exc:
        print(f"feasibility gate refused: {exc}", file=sys.stderr)
        print("re-run with --force to override", file=sys.stderr)
        return 4
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
