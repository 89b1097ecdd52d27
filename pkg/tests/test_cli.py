from pathlib import Path

import pytest

from slowmol.cli import main, run
from slowmol.config import load_config
from slowmol.reports import read_csv

KRB_ARGS = ["--set", "medium.g_tilde_rad_per_us=5e-5",
            "--set", "medium.n_a=1.0e6", "--set", "medium.n_b=5.0e6"]


def read_summary(outdir):
    out = {}
    for line in (Path(outdir) / "summary.txt").read_text().splitlines():
        key, _, val = line.partition(" = ")
        out[key] = val
    return out


def test_groupvel_krb_summary_contains_velocity_floor(tmp_path):
    out = tmp_path / "gv"
    assert main(["groupvel", "--out", str(out)] + KRB_ARGS) == 0
    summary = read_summary(out)
    floor = float(summary["velocity_floor_m_per_s"])
    assert floor == pytest.approx(524.0, rel=0.01)
    assert float(summary["velocity_floor_km_per_s"]) == pytest.approx(0.524, rel=0.01)
    header, cols = read_csv(out / "velocity_curve.csv")
    assert header == ["t_us", "omega_rad_per_us", "vg_over_c"]
    assert (out / "config.txt").exists()


def test_imbalance_writes_curves_and_manifest(tmp_path):
    out = tmp_path / "imb"
    code = main(["imbalance", "--out", str(out),
                 "--set", "sweep.etas=1,2,15"])
    assert code == 0
    manifest = (out / "manifest.csv").read_text().splitlines()
    assert manifest[0] == "curve_id,eta_or_kind,file"
    assert len(manifest) == 4
    for line in manifest[1:]:
        fname = line.split(",")[2]
        assert (out / fname).exists()
        header, _ = read_csv(out / fname)
        assert header == ["t_us", "omega_rad_per_us", "vg_over_c"]


def test_mediums_reports_exponents(tmp_path):
    out = tmp_path / "med"
    assert main(["mediums", "--out", str(out)]) == 0
    summary = read_summary(out)
    assert float(summary["scaling_exponent_atomic_eit"]) == pytest.approx(1.0, abs=1e-6)
    assert float(summary["scaling_exponent_heteronuclear_trimer"]) == pytest.approx(
        3.0, abs=1e-6)


def test_feasibility_summary(tmp_path):
    out = tmp_path / "feas"
    assert main(["feasibility", "--out", str(out)] + KRB_ARGS) == 0
    summary = read_summary(out)
    assert float(summary["gamma1_inverse_ms"]) == pytest.approx(1.64, abs=0.01)
    assert (out / "feasibility.csv").exists()


def test_store_with_desk_preset(tmp_path):
    out = tmp_path / "store"
    code = main(["store", "--out", str(out), "--set", "preset=desk-storage",
                 "--set", "grid.n_z=512", "--set", "grid.t_end_us=60",
                 "--set", "schedule.t_down_us=5", "--set", "schedule.t_up_us=55",
                 "--set", "schedule.rate_per_us=0.5",
                 "--set", "grid.snapshot_stride=50"])
    assert code == 0
    summary = read_summary(out)
    assert float(summary["fidelity"]) > 0.95
    assert float(summary["mapping_residual"]) < 0.03
    header, _ = read_csv(out / "storage_report.csv")
    assert header == ["z_um", "re_E_in", "im_E_in", "re_phig_stored",
                      "im_phig_stored", "re_E_out", "im_E_out"]
    manifest = (out / "snapshots" / "snapshots.csv").read_text().splitlines()
    assert manifest[0] == "index,t_us,file"
    for line in manifest[1:]:
        assert (out / "snapshots" / line.split(",")[2]).exists()


def test_propagate_snapshot_dump(tmp_path):
    out = tmp_path / "prop"
    code = main(["propagate", "--out", str(out), "--set", "preset=desk-storage",
                 "--set", "grid.n_z=256", "--set", "grid.t_end_us=10",
                 "--set", "grid.snapshot_stride=20"])
    assert code == 0
    header, cols = read_csv(out / "snapshot_00000.csv")
    assert header[:3] == ["z_um", "re_E", "im_E"]
    assert len(header) == 11  # z plus re/im of five fields
    summary = read_summary(out)
    travel = float(summary["travel_measured_um"])
    predicted = float(summary["travel_predicted_um"])
    assert travel == pytest.approx(predicted, rel=0.05)


def test_gpe_split_outputs(tmp_path):
    out = tmp_path / "split"
    code = main(["gpe-split", "--out", str(out),
                 "--set", "gpegrid.t_end_us=6",
                 "--set", "gpegrid.snapshot_stride=100"])
    assert code == 0
    summary = read_summary(out)
    assert summary["succeeded"] == "1.0"
    traj = (out / "trajectory.csv").read_text().splitlines()
    assert traj[0] == "t_us,dip_index,z_um,speed_um_per_us"
    assert (out / "separation.csv").exists()


def test_gpe_soliton_outputs(tmp_path):
    out = tmp_path / "sol"
    code = main(["gpe-soliton", "--out", str(out),
                 "--set", "gpegrid.t_end_us=5",
                 "--set", "gpegrid.snapshot_stride=100"])
    assert code == 0
    summary = read_summary(out)
    assert float(summary["measured_speed_um_per_us"]) == pytest.approx(0.6, rel=0.05)
    frames = (out / "frames" / "frames.csv").read_text().splitlines()
    assert frames[0] == "index,t_us,file"
    header, _ = read_csv(out / "frames" / "frame_00000.csv")
    assert header == ["z_um", "density", "phase"]


# ------------------------------------------------------------------ exit codes

def test_exit_code_2_on_config_error(tmp_path, capsys):
    assert main(["groupvel", "--out", str(tmp_path / "x"),
                 "--set", "bogus.key=1"]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_exit_code_2_on_bad_invariant(tmp_path):
    assert main(["imbalance", "--out", str(tmp_path / "x"),
                 "--set", "sweep.etas=-1"]) == 2


def test_exit_code_4_on_feasibility_refusal(tmp_path, capsys):
    # full-scale store: the spectral window fails for the default medium
    assert main(["store", "--out", str(tmp_path / "x")]) == 4
    assert "--force" in capsys.readouterr().err


def test_exit_code_3_on_numerical_failure(tmp_path, capsys):
    code = main(["propagate", "--out", str(tmp_path / "x"),
                 "--set", "preset=desk-storage",
                 "--set", "grid.n_z=256", "--set", "grid.t_end_us=5",
                 "--set", "schedule.omega0_rad_per_us=8000",
                 "--set", "run.substeps=1"])
    assert code == 3
    assert "non-finite" in capsys.readouterr().err


def test_force_flag_overrides_gate(tmp_path):
    out = tmp_path / "forced"
    code = main(["store", "--out", str(out), "--force",
                 "--set", "preset=desk-storage",
                 "--set", "medium.gamma_g_rad_per_us=0.1",
                 "--set", "grid.n_z=256", "--set", "grid.t_end_us=30",
                 "--set", "schedule.t_down_us=4", "--set", "schedule.t_up_us=26",
                 "--set", "schedule.rate_per_us=0.6",
                 "--set", "grid.snapshot_stride=100"])
    assert code == 0
    assert float(read_summary(out)["efficiency"]) < 0.5


def test_refuses_nonempty_output_dir(tmp_path):
    out = tmp_path / "occupied"
    out.mkdir()
    (out / "stale.txt").write_text("old results")
    assert main(["groupvel", "--out", str(out)]) == 2
    assert (out / "stale.txt").exists()  # untouched


def test_no_partial_outputs_on_failure(tmp_path):
    out = tmp_path / "failed"
    code = main(["propagate", "--out", str(out),
                 "--set", "preset=desk-storage",
                 "--set", "grid.n_z=256", "--set", "grid.t_end_us=5",
                 "--set", "schedule.omega0_rad_per_us=8000",
                 "--set", "run.substeps=1"])
    assert code == 3
    assert not out.exists()
    assert not (tmp_path / "failed.partial").exists()


def test_rerun_is_byte_identical(tmp_path):
    args = ["imbalance", "--set", "sweep.etas=0.5,1,2"]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(args + ["--out", str(out)]) == 0
        outs.append(out)
    for fname in ("manifest.csv", "summary.txt", "curve_eta00.csv",
                  "curve_eta01.csv", "curve_eta02.csv", "config.txt"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_run_api_rejects_unknown_experiment(tmp_path):
    cfg = load_config(None, [])
    object.__setattr__(cfg, "experiment", "nonsense")
    with pytest.raises(KeyError):
        run(cfg, tmp_path / "x")


def test_config_file_plus_override(tmp_path):
    cfg_file = tmp_path / "krb.cfg"
    cfg_file.write_text("\n".join([
        "medium.g_tilde_rad_per_us = 5e-5",
        "medium.n_a = 1.0e6",
        "medium.n_b = 5.0e6",
    ]) + "\n", encoding="utf-8")
    out = tmp_path / "gv"
    code = main(["groupvel", "--config", str(cfg_file), "--out", str(out),
                 "--set", "curve.points=31"])
    assert code == 0
    assert float(read_summary(out)["velocity_floor_m_per_s"]) == pytest.approx(
        523.5, abs=0.1)
    _, cols = read_csv(out / "velocity_curve.csv")
    assert len(cols["t_us"]) == 31
