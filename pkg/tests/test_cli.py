import json

import numpy as np
import pytest

import mlestep as ms
from mlestep import mc
from mlestep.cli import main


def run_cli(*args):
    return main(list(args))


class TestSimulateCommand:
    def test_csv_row_count(self, tmp_path):
        out = tmp_path / "traj.csv"
        code = run_cli(
            "simulate", "--model", "example2", "--theta", "0.5",
            "--n", "10000", "--seed", "1", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[1] == "index,x"
        assert len(lines) - 2 == 10_001

    def test_missing_model_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            run_cli("simulate", "--theta", "0.5", "--n", "100")
        assert err.value.code == 2

    def test_json_format_carries_metadata(self, tmp_path):
        out = tmp_path / "traj.json"
        code = run_cli(
            "simulate", "--model", "example2", "--theta", "0.5",
            "--n", "50", "--seed", "3", "--format", "json", "--out", str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["model_name"] == "example2"
        assert payload["true_theta"] == [0.5]
        assert payload["seed"] == 3
        assert payload["burn_in"] == 1000
        assert len(payload["observations"]) == 51

    def test_outdir_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MLESTEP_OUTDIR", str(tmp_path / "nested"))
        code = run_cli(
            "simulate", "--model", "linear", "--theta", "0.2", "--n", "10",
        )
        assert code == 0
        assert (tmp_path / "nested" / "trajectory_linear_0.csv").exists()


class TestEstimateCommand:
    def test_example2_learning_length_178(self, tmp_path, capsys):
        out = tmp_path / "path.csv"
        code = run_cli(
            "estimate", "--model", "example2", "--theta", "0.5", "--n", "1000",
            "--seed", "2", "--delta", "0.75", "--preliminary", "emm",
            "--process", "one-step", "--out", str(out),
        )
        assert code == 0
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert summary["N"] == 178
        echoed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert echoed["N"] == 178

    def test_two_step_learning_length_32(self, tmp_path):
        out = tmp_path / "path.csv"
        code = run_cli(
            "estimate", "--model", "example2", "--theta", "0.5", "--n", "10000",
            "--seed", "2", "--delta", "0.375", "--preliminary", "emm",
            "--process", "two-step", "--fisher", "factorized",
            "--stride", "2000", "--out", str(out),
        )
        assert code == 0
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert summary["N"] == 32
        assert summary["path"]["kind"] == "two-step"

    def test_example1_path_covers_index_range(self, tmp_path):
        out = tmp_path / "path.csv"
        code = run_cli(
            "estimate", "--model", "example1", "--theta", "2.5", "--n", "1000",
            "--seed", "4", "--delta", "0.75", "--preliminary", "mle",
            "--process", "one-step", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        rows = [line.split(",") for line in lines[2:]]
        assert int(rows[0][0]) == 178 + 1
        assert int(rows[-1][0]) == 1000
        assert rows[0][3] == "one-step"

    def test_reads_trajectory_file(self, tmp_path):
        traj_path = tmp_path / "traj.json"
        run_cli(
            "simulate", "--model", "example2", "--theta", "0.5", "--n", "500",
            "--seed", "6", "--format", "json", "--out", str(traj_path),
        )
        out = tmp_path / "path.csv"
        code = run_cli(
            "estimate", "--input", str(traj_path), "--delta", "0.75",
            "--preliminary", "emm", "--out", str(out),
        )
        assert code == 0
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert summary["config"]["trajectory"]["seed"] == 6

    def test_missing_inputs_fail_cleanly(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("MLESTEP_OUTDIR", str(tmp_path))
        code = run_cli("estimate", "--delta", "0.75")
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_degenerate_information_surfaces_as_error(self, capsys, tmp_path):
        from helpers import zero_model
        from mlestep.models import register_model

        # the trajectory file names its model, so register under that name
        register_model("zero", zero_model)
        traj_path = tmp_path / "traj.json"
        traj = ms.simulate(ms.get_model("zero"), 0.0, 200, seed=1)
        from mlestep.simulate import write_trajectory_json

        write_trajectory_json(traj, traj_path)
        code = run_cli(
            "estimate", "--input", str(traj_path), "--delta", "0.75",
            "--preliminary", "emm", "--out", str(tmp_path / "p.csv"),
        )
        assert code == 1
        assert "positive definite" in capsys.readouterr().err


class TestKdeCommand:
    def test_rows_header_and_bandwidth_echo(self, tmp_path, capsys):
        out = tmp_path / "density.csv"
        code = run_cli(
            "kde", "--model", "example1", "--theta", "2.5", "--n", "2000",
            "--seed", "9", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[1] == "x,density"
        assert len(lines) == 2 + 512
        echoed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert echoed["rows"] == 512
        assert echoed["bandwidth"] == pytest.approx(2000 ** (-0.2))
        meta = json.loads(lines[0][2:])
        assert meta["bandwidth"] == pytest.approx(2000 ** (-0.2))

    def test_bandwidth_flag(self, tmp_path, capsys):
        out = tmp_path / "density.csv"
        run_cli(
            "kde", "--model", "linear", "--theta", "0.5", "--n", "500",
            "--bandwidth", "0.3", "--out", str(out),
        )
        echoed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert echoed["bandwidth"] == 0.3


class TestMcCommand:
    @staticmethod
    def _write_config(path, **overrides):
        payload = dict(
            model_name="linear",
            theta0=[0.5],
            n=300,
            delta=0.6,
            preliminary="mle",
            process="one-step",
            fisher_method="observed",
            replications=6,
            base_seed=0,
            reference_information=[[4.0 / 3.0]],
        )
        payload.update(overrides)
        path.write_text(json.dumps(payload))

    def test_report_written_and_deterministic(self, tmp_path):
        cfg_path = tmp_path / "study.json"
        self._write_config(cfg_path)
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        assert run_cli("mc", "--config", str(cfg_path), "--workers", "1", "--out", str(out_a)) == 0
        assert run_cli("mc", "--config", str(cfg_path), "--workers", "1", "--out", str(out_b)) == 0
        assert out_a.read_text() == out_b.read_text()
        payload = json.loads(out_a.read_text())
        assert payload["config"]["model_name"] == "linear"
        assert out_a.with_suffix(".csv").exists()

    def test_invalid_config_fails_cleanly(self, tmp_path, capsys):
        cfg_path = tmp_path / "study.json"
        self._write_config(cfg_path, bogus_field=1)
        code = run_cli("mc", "--config", str(cfg_path), "--out", str(tmp_path / "r.json"))
        assert code == 1
        assert "unknown" in capsys.readouterr().err

    def test_replication_failures_propagate(self, tmp_path, capsys, monkeypatch):
        def broken(cfg, seed):
            raise ValueError("all replications down")

        monkeypatch.setattr(mc, "_replicate", broken)
        cfg_path = tmp_path / "study.json"
        self._write_config(cfg_path)
        code = run_cli(
            "mc", "--config", str(cfg_path), "--workers", "1",
            "--out", str(tmp_path / "r.json"),
        )
        assert code == 1
        assert "failed" in capsys.readouterr().err
