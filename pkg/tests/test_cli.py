import json

import numpy as np
import pytest

from ledr import run_recurrence
from ledr.cli import main
from ledr.config import build_config, load_config, parse_kv
from ledr.errors import ConfigError, SchemaError
from ledr.io import (
    read_ledr_csv,
    read_trajectory_csv,
    write_ledr_csv,
    write_trajectory_csv,
)

BASE_CONFIG = """
# curved truth vs flat model on the shared comparison chart
world_true.kind=constant_k
world_true.k=1.0
world_model.kind=flat
world_model.n=2
x0=0.0,0.0
v0=1.0,0.001
v0_model=1.0,0.0
h=0.01
steps=800
seed=3
"""


def write_config(tmp_path, text=BASE_CONFIG, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestConfig:
    def test_parse_and_build(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        assert cfg.world_true.kind == "constant_k"
        assert cfg.world_model.kind == "flat"
        assert cfg.h == 0.01
        assert cfg.steps == 800
        assert cfg.seed == 3
        np.testing.assert_array_equal(cfg.v0_model, [1.0, 0.0])

    def test_nonpositive_h_names_field(self):
        mapping = parse_kv(BASE_CONFIG.replace("h=0.01", "h=-0.5"))
        with pytest.raises(ConfigError) as err:
            build_config(mapping)
        assert err.value.field == "h"

    def test_dimension_mismatch_between_worlds(self):
        text = BASE_CONFIG.replace("world_model.n=2", "world_model.n=3")
        with pytest.raises(ConfigError):
            build_config(parse_kv(text))

    def test_missing_field_reported(self):
        text = BASE_CONFIG.replace("steps=800", "")
        with pytest.raises(ConfigError) as err:
            build_config(parse_kv(text))
        assert err.value.field == "steps"

    def test_bad_scheme(self):
        with pytest.raises(ConfigError) as err:
            build_config(parse_kv(BASE_CONFIG + "scheme=verlet\n"))
        assert err.value.field == "scheme"


class TestSimulate:
    def test_outputs_and_row_counts(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        csvs = sorted(p.name for p in out.glob("*.csv"))
        assert csvs == [
            "ledr_difference.csv",
            "ledr_recurrence.csv",
            "trajectory_model.csv",
            "trajectory_true.csv",
        ]
        assert (out / "manifest.json").exists()
        series = read_ledr_csv(out / "ledr_difference.csv")
        assert len(series) == 801  # steps + 1 rows
        assert len(read_ledr_csv(out / "ledr_recurrence.csv")) == 801

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1), "--no-figures"]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2), "--no-figures"]) == 0
        for name in (
            "trajectory_true.csv",
            "trajectory_model.csv",
            "ledr_difference.csv",
            "ledr_recurrence.csv",
            "manifest.json",
        ):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_validation_error_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG.replace("h=0.01", "h=0.0"))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2

    def test_chart_exit_code(self, tmp_path):
        text = """
world_true.kind=sphere
world_true.r=1.0
world_model.kind=flat
world_model.n=2
x0=0.3,0.0
v0=-0.5,0.0
h=0.05
steps=100
"""
        cfg = write_config(tmp_path, text)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 3

    def test_divergence_abort_code(self, tmp_path):
        text = """
world_true.kind=constant_k
world_true.k=-100.0
world_model.kind=flat
world_model.n=2
x0=0.0,0.0
v0=1.0,0.5
v0_model=1.0,0.0
h=0.05
steps=500
"""
        cfg = write_config(tmp_path, text)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 4

    def test_figures_toggle(self, tmp_path):
        cfg = write_config(tmp_path)
        with_fig = tmp_path / "fig"
        without_fig = tmp_path / "nofig"
        main(["simulate", "--config", str(cfg), "--out", str(with_fig)])
        main(["simulate", "--config", str(cfg), "--out", str(without_fig), "--no-figures"])
        assert (with_fig / "ledr.png").exists()
        assert not (without_fig / "ledr.png").exists()

    def test_env_var_default_out_dir(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path)
        root = tmp_path / "envroot"
        monkeypatch.setenv("LEDR_OUT_DIR", str(root))
        assert main(["simulate", "--config", str(cfg), "--no-figures"]) == 0
        assert (root / "manifest.json").exists()


class TestSpherePlane:
    def test_unit_radius_report(self, tmp_path):
        out = tmp_path / "sp"
        code = main([
            "sphere-plane", "--r", "1.0", "--h", "0.001",
            "--horizon", str(2 * np.pi), "--out", str(out), "--no-figures",
        ])
        assert code == 0
        report = json.loads((out / "frequency_report.json").read_text())
        assert abs(report["omega_fit"] - 1.0) <= 1e-3
        assert report["rows"] == int(round(2 * np.pi / 0.001)) + 1

    def test_radius_two_halves_frequency(self, tmp_path):
        out = tmp_path / "sp2"
        code = main([
            "sphere-plane", "--r", "2.0", "--h", "0.002",
            "--horizon", str(8 * np.pi), "--out", str(out), "--no-figures",
        ])
        assert code == 0
        report = json.loads((out / "frequency_report.json").read_text())
        assert abs(report["omega_fit"] - 0.5) <= 5e-4

    def test_zero_radius_validation(self, tmp_path):
        assert main(["sphere-plane", "--r", "0", "--out", str(tmp_path / "x")]) == 2

    def test_figure_rendered_by_default(self, tmp_path):
        out = tmp_path / "spfig"
        main(["sphere-plane", "--r", "1.0", "--h", "0.01",
              "--horizon", str(4 * np.pi), "--out", str(out)])
        assert (out / "sphere_plane.png").exists()


class TestStability:
    def test_regime_flip_across_window_boundary(self, tmp_path):
        out = tmp_path / "stab"
        # K = 1, h in {1.8, 1.9, 2.0, 2.1, 2.2}: lambda crosses 4 at h = 2
        code = main([
            "stability", "--k-min", "1.0", "--k-max", "1.0", "--k-steps", "1",
            "--h-min", "1.8", "--h-max", "2.2", "--h-steps", "5",
            "--out", str(out), "--no-figures",
        ])
        assert code == 0
        rows = (out / "stability.csv").read_text().strip().splitlines()[1:]
        regimes = [row.split(",")[3] for row in rows]
        assert regimes == [
            "oscillatory", "oscillatory", "degenerate_boundary",
            "divergent_positive", "divergent_positive",
        ]

    def test_all_negative_grid(self, tmp_path):
        out = tmp_path / "neg"
        main([
            "stability", "--k-min", "-4.0", "--k-max", "-0.5", "--k-steps", "4",
            "--h-min", "0.1", "--h-max", "1.0", "--h-steps", "3",
            "--out", str(out), "--no-figures",
        ])
        rows = (out / "stability.csv").read_text().strip().splitlines()[1:]
        assert all(row.split(",")[3] == "divergent_negative" for row in rows)

    def test_single_cell_frequency_value(self, tmp_path):
        out = tmp_path / "cell"
        main([
            "stability", "--k-min", "1.0", "--k-steps", "1",
            "--h-min", "0.1", "--h-steps", "1", "--out", str(out), "--no-figures",
        ])
        rows = (out / "stability.csv").read_text().strip().splitlines()
        assert len(rows) == 2
        omega_d = float(rows[1].split(",")[4])
        assert omega_d == pytest.approx(1.0004171361154006, abs=1e-12)

    def test_grid_figure(self, tmp_path):
        out = tmp_path / "map"
        main([
            "stability", "--k-min", "-1.0", "--k-max", "2.0", "--k-steps", "4",
            "--h-min", "0.5", "--h-max", "2.0", "--h-steps", "4", "--out", str(out),
        ])
        assert (out / "stability.png").exists()


class TestEstimateK:
    def test_recurrence_input_recovers_k_exactly(self, tmp_path):
        s = run_recurrence(np.array([0.0]), np.array([0.1]), 400, 0.1, 1.0)
        path = tmp_path / "series.csv"
        write_ledr_csv(path, s)
        out = tmp_path / "est"
        assert main(["estimate-k", "--input", str(path), "--out", str(out), "--no-figures"]) == 0
        payload = json.loads((out / "estimate_k.json").read_text())
        assert abs(payload["summary"]["median"] - 1.0) <= 1e-12

    def test_sine_input_median(self, tmp_path):
        from ledr import DiscreteLedrSeries

        s = DiscreteLedrSeries(0.1, np.sin(np.arange(300) * 0.1)[:, None], origin="measured")
        path = tmp_path / "sine.csv"
        write_ledr_csv(path, s)
        out = tmp_path / "est2"
        main(["estimate-k", "--input", str(path), "--out", str(out), "--no-figures"])
        payload = json.loads((out / "estimate_k.json").read_text())
        assert payload["summary"]["median"] == pytest.approx(0.9991669443948357, abs=1e-9)

    def test_zero_row_flagged_invalid(self, tmp_path):
        from ledr import DiscreteLedrSeries

        values = np.sin(np.arange(60) * 0.1)
        values[20] = 0.0
        s = DiscreteLedrSeries(0.1, values[:, None], origin="measured")
        path = tmp_path / "zero.csv"
        write_ledr_csv(path, s)
        out = tmp_path / "est3"
        main(["estimate-k", "--input", str(path), "--out", str(out), "--no-figures"])
        payload = json.loads((out / "estimate_k.json").read_text())
        assert payload["valid"][20] is False
        assert payload["k_values"][20] is None
        assert payload["valid"][19] is True

    def test_step_mismatch_rejected(self, tmp_path):
        s = run_recurrence(np.array([0.0]), np.array([0.1]), 50, 0.1, 1.0)
        path = tmp_path / "series.csv"
        write_ledr_csv(path, s)
        assert main([
            "estimate-k", "--input", str(path), "--h", "0.2", "--out", str(tmp_path / "x"),
        ]) == 2

    def test_schema_violation_diagnostics(self, tmp_path):
        path = tmp_path / "broken.csv"
        path.write_text("t,xi0\n0.0,1.0\n0.1,oops\n")
        with pytest.raises(SchemaError) as err:
            read_ledr_csv(path)
        assert err.value.row == 2
        assert err.value.column == "xi0"
        assert main(["estimate-k", "--input", str(path), "--out", str(tmp_path / "x")]) == 2


class TestRoundTrip:
    def test_trajectory_csv(self, tmp_path, sphere1):
        from ledr import integrate_geodesic

        traj = integrate_geodesic(
            sphere1.connection, np.array([1.2, 0.0]), np.array([0.3, 0.9]), 1e-2, 50
        )
        path = tmp_path / "traj.csv"
        write_trajectory_csv(path, traj)
        back = read_trajectory_csv(path, connection_tag=traj.connection_tag)
        assert back.h == traj.h
        assert np.array_equal(back.points, traj.points)
        assert np.array_equal(back.velocities, traj.velocities)
        assert back.connection_tag == traj.connection_tag

    def test_ledr_csv(self, tmp_path):
        s = run_recurrence(np.array([0.0, 0.01]), np.array([0.1, -0.02]), 40, 0.05, 2.0)
        path = tmp_path / "ledr.csv"
        write_ledr_csv(path, s)
        back = read_ledr_csv(path, origin=s.origin)
        assert back.h == s.h
        assert np.array_equal(back.xi, s.xi)
        assert back.origin == s.origin

    def test_json_round_trip(self, tmp_path):
        from ledr.io import read_json, write_json

        payload = {"a": 1.5, "b": [1.0, 2.0], "c": {"nested": True}, "d": None}
        path = tmp_path / "report.json"
        write_json(path, payload)
        assert read_json(path) == payload
