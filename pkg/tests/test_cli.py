"""Command-line interface: exit codes, file outputs, determinism."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

import routhlab as rl
from routhlab.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def invoke(args):
    return CliRunner().invoke(main, args)


class TestExitCodes:
    def test_passing_verification_exits_zero(self, tmp_path):
        r = invoke(
            ["verify", "--config", str(CONFIGS / "oscillator_verify.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        assert "[PASS]" in r.output

    def test_wrong_energy_without_rescale_exits_one(self, tmp_path):
        r = invoke(
            ["verify", "--config", str(CONFIGS / "tamper_wrong_energy.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 1
        assert "[FAIL]" in r.output

    def test_noncyclic_declaration_exits_two(self, tmp_path):
        r = invoke(
            ["routh-reduce", "--config", str(CONFIGS / "tamper_bad_cyclic.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 2
        assert "not cyclic" in r.output

    def test_unreachable_energy_exits_three(self, tmp_path):
        r = invoke(
            ["verify", "--config", str(CONFIGS / "tamper_unreachable_energy.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 3
        assert "EnergyUnreachable" in r.output

    def test_malformed_json_exits_two(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text("{ not json")
        r = invoke(["describe", "--config", str(bad), "--out", str(tmp_path)])
        assert r.exit_code == 2

    def test_unknown_family_exits_two(self, tmp_path):
        bad = tmp_path / "family.json"
        bad.write_text(json.dumps({"lagrangian": {"family": "nope"}}))
        r = invoke(["describe", "--config", str(bad), "--out", str(tmp_path)])
        assert r.exit_code == 2

    def test_exit_codes_through_real_processes(self, tmp_path):
        # the documented codes must hold for actual process exits, not just
        # the in-process runner
        cases = [
            ("verify", "oscillator_verify.json", 0),
            ("verify", "tamper_wrong_energy.json", 1),
            ("routh-reduce", "tamper_bad_cyclic.json", 2),
            ("verify", "tamper_unreachable_energy.json", 3),
        ]
        for cmd, cfg, want in cases:
            proc = subprocess.run(
                [sys.executable, "-m", "routhlab.cli", cmd,
                 "--config", str(CONFIGS / cfg), "--out", str(tmp_path / cfg)],
                capture_output=True, text=True, timeout=300,
            )
            assert proc.returncode == want, (
                f"{cmd} {cfg}: expected exit {want}, got {proc.returncode}\n"
                f"stdout: {proc.stdout}\nstderr: {proc.stderr}"
            )


class TestCommands:
    def test_describe_reports_model_and_initial_state(self, tmp_path):
        r = invoke(
            ["describe", "--config", str(CONFIGS / "oscillator_verify.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        payload = json.loads(r.output)
        assert payload["model"]["family"] == "simple"
        assert payload["model"]["dim"] == 2
        assert payload["initial"]["energy"] == pytest.approx(5.0)
        assert payload["initial"]["strongly_convex"] is True

    def test_integrate_el_writes_loadable_csv(self, tmp_path):
        r = invoke(
            ["integrate-el", "--config", str(CONFIGS / "oscillator_verify.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        traj = rl.read_trajectory_csv(tmp_path / "el_trajectory.csv")
        assert traj.times.shape == (801,)
        assert traj.positions.shape == (801, 2)
        drift = np.max(np.abs(traj.energy_log - traj.energy_log[0]))
        assert drift < 1e-8

    def test_geodesic_writes_unit_speed_run(self, tmp_path):
        r = invoke(
            ["geodesic", "--config", str(CONFIGS / "disk_verify.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        traj = rl.read_trajectory_csv(tmp_path / "geodesic_trajectory.csv")
        np.testing.assert_allclose(traj.energy_log, 1.0, atol=1e-8)

    def test_finslerize_reports_scale_and_convexity(self, tmp_path):
        r = invoke(
            ["finslerize", "--config", str(CONFIGS / "oscillator_verify.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        payload = json.loads(r.output)
        assert payload["quasi_definite"]["positive"] is True
        assert payload["closed_form_gap"] < 1e-10
        assert payload["metric"]["family"] == "jacobi"

    def test_routh_reduce_round_trip_files(self, tmp_path):
        r = invoke(
            ["routh-reduce", "--config", str(CONFIGS / "polar_reduction.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        report = json.loads((tmp_path / "reduction_report.json").read_text())
        assert report["overall"] is True
        traj = rl.read_trajectory_csv(tmp_path / "reconstructed_trajectory.csv")
        assert traj.positions.shape[1] == 2

    def test_verify_report_json_carries_config_name(self, tmp_path):
        r = invoke(
            ["verify", "--config", str(CONFIGS / "disk_verify.json"),
             "--out", str(tmp_path)]
        )
        assert r.exit_code == 0, r.output
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["config"] == "disk_verify.json"
        assert report["overall"] is True
        assert {m["label"] for m in report["metrics"]} >= {
            "trace_distance", "pointwise_mismatch"
        }

    def test_plot_writes_deterministic_svg(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            r = invoke(
                ["plot", "--config", str(CONFIGS / "disk_verify.json"),
                 "--out", str(out)]
            )
            assert r.exit_code == 0, r.output
        svg_a = (a / "trajectories.svg").read_bytes()
        svg_b = (b / "trajectories.svg").read_bytes()
        assert svg_a == svg_b
        assert b"<svg" in svg_a and b"circle" in svg_a


class TestTrajectoryFiles:
    def test_csv_round_trip_is_byte_identical(self, tmp_path):
        L = rl.poincare_disk_lagrangian()
        traj = rl.integrate_el(
            L, np.array([0.1, -0.2]), np.array([0.4, 0.3]), 1.0, samples=101
        )
        p1 = tmp_path / "one.csv"
        p2 = tmp_path / "two.csv"
        rl.write_trajectory_csv(p1, traj)
        loaded = rl.read_trajectory_csv(p1)
        rl.write_trajectory_csv(p2, loaded)
        assert p1.read_bytes() == p2.read_bytes()
        np.testing.assert_array_equal(traj.times, loaded.times)
        np.testing.assert_array_equal(traj.positions, loaded.positions)
        np.testing.assert_array_equal(traj.velocities, loaded.velocities)
        np.testing.assert_array_equal(traj.energy_log, loaded.energy_log)
        assert loaded.meta["kind"] == "loaded"
        assert loaded.dense is None

    def test_malformed_csv_raises_config_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,x1,v1,conserved\n0.0,1.0\n")
        with pytest.raises(rl.ConfigError):
            rl.read_trajectory_csv(bad)
        with pytest.raises(OSError):
            rl.read_trajectory_csv(tmp_path / "missing.csv")

    def test_report_json_is_sorted_and_stable(self, tmp_path):
        report = rl.VerificationReport(name="demo")
        report.check("alpha", 1e-9, 1e-6)
        p = tmp_path / "r.json"
        rl.write_report_json(p, report, seed=7)
        payload = json.loads(p.read_text())
        assert payload["seed"] == 7
        keys = list(payload)
        assert keys == sorted(keys)

    def test_curves_svg_draws_given_polylines(self, tmp_path):
        t = np.linspace(0, 2 * np.pi, 100)
        ring = np.column_stack([np.cos(t), np.sin(t)])
        p = tmp_path / "c.svg"
        rl.curves_svg(
            p,
            [{"points": ring, "label": "ring"}],
            show_unit_disk=True,
            title="rings",
        )
        text = p.read_text()
        assert text.count("<polyline") == 1
        assert "rings" in text
