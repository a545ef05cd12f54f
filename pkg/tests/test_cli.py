"""Command-line orchestration: configs, artifacts, exit codes, determinism."""

import json
import os

import numpy as np
import pytest
import yaml

from cageintime import cli
from cageintime import oracle
from cageintime.config import BadSpec, load_config


def write_config(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def push_doc(out, **kw):
    doc = {
        "task": "push",
        "trajectory": {"kind": "circle", "radius_mm": 60.0, "steps": 48},
        "cage_size_mm": 20.0,
        "K": 16,
        "d_push_mm": 20.0,
        "rollouts": 3,
        "seed": 0,
        "out": out,
    }
    doc.update(kw)
    return doc


def ball_doc(out, **kw):
    doc = {
        "task": "ball",
        "mode": "balance",
        "n": 1,
        "trajectory": {"kind": "stationary", "horizon_s": 1.0},
        "rollouts": 3,
        "seed": 0,
        "out": out,
    }
    doc.update(kw)
    return doc


class TestConfigValidation:
    def test_missing_file(self, capsys):
        assert cli.main(["push", "--config", "/nonexistent.yaml"]) == 1

    def test_missing_task_field(self, tmp_path):
        path = write_config(tmp_path, "c.yaml", {"trajectory": {"kind": "circle"}})
        assert cli.main(["push", "--config", path]) == 1

    def test_unknown_trajectory_kind(self, tmp_path):
        doc = push_doc(str(tmp_path / "out"))
        doc["trajectory"] = {"kind": "spiral", "steps": 10}
        path = write_config(tmp_path, "c.yaml", doc)
        with pytest.raises(BadSpec):
            cfg = load_config(path)
            cli.run(cfg)

    def test_missing_polyline_file(self, tmp_path):
        doc = push_doc(str(tmp_path / "out"))
        doc["trajectory"] = {"kind": "polyline", "file": "/missing.csv",
                             "spacing_mm": 5.0, "steps": 10}
        path = write_config(tmp_path, "c.yaml", doc)
        assert cli.main(["push", "--config", path]) == 1
        assert not (tmp_path / "out").exists()  # no partial artifacts

    def test_sweep_requires_grids(self, tmp_path):
        path = write_config(tmp_path, "c.yaml", {"task": "sweep", "v0_grid": []})
        assert cli.main(["sweep", "--config", path]) == 1

    def test_task_command_mismatch(self, tmp_path):
        path = write_config(tmp_path, "c.yaml", push_doc(str(tmp_path / "out")))
        assert cli.main(["ball", "--config", path]) == 1


class TestPushCommand:
    def test_success_artifacts_and_exit_zero(self, tmp_path):
        out = str(tmp_path / "out")
        path = write_config(tmp_path, "c.yaml", push_doc(out))
        assert cli.main(["push", "--config", path]) == 0
        plan = json.loads((tmp_path / "out" / "plan.json").read_text())
        assert isinstance(plan, list) and {"t", "theta", "k"} <= set(plan[0])
        lines = (tmp_path / "out" / "runlog.jsonl").read_text().splitlines()
        rec = json.loads(lines[0])
        assert {"t", "action", "contained", "pss_cells", "cage_center"} <= set(rec)
        rollouts = (tmp_path / "out" / "rollouts.csv").read_text().splitlines()
        assert rollouts[0] == "rollout,max_error_mm"
        assert len(rollouts) == 4

    def test_deterministic_artifacts(self, tmp_path):
        p1 = write_config(tmp_path, "a.yaml", push_doc(str(tmp_path / "o1")))
        p2 = write_config(tmp_path, "b.yaml", push_doc(str(tmp_path / "o2")))
        assert cli.main(["push", "--config", p1]) == 0
        assert cli.main(["push", "--config", p2]) == 0
        for name in ("plan.json", "runlog.jsonl", "rollouts.csv"):
            a = (tmp_path / "o1" / name).read_bytes()
            b = (tmp_path / "o2" / name).read_bytes()
            assert a == b, name

    def test_oracle_containment_failure_exit_three(self, tmp_path, monkeypatch):
        out = str(tmp_path / "out")
        path = write_config(tmp_path, "c.yaml", push_doc(out))

        def bad_rollout(plan, problem, q0, cfg, rng):
            return [q0], problem.cage_size + 5.0

        monkeypatch.setattr(oracle, "rollout_push_plan", bad_rollout)
        assert cli.main(["push", "--config", path]) == 3

    def test_render_writes_pgm_frames(self, tmp_path):
        out = str(tmp_path / "out")
        doc = push_doc(out)
        doc["trajectory"].update(radius_mm=30.0, steps=24)
        path = write_config(tmp_path, "c.yaml", doc)
        assert cli.main(["render", "--config", path]) == 0
        frames = sorted(os.listdir(tmp_path / "out" / "frames"))
        assert frames and frames[0] == "frame_0000.pgm"
        data = (tmp_path / "out" / "frames" / frames[0]).read_bytes()
        assert data.startswith(b"P5\n")


class TestBallCommand:
    def test_balance_success(self, tmp_path):
        out = str(tmp_path / "out")
        path = write_config(tmp_path, "c.yaml", ball_doc(out))
        assert cli.main(["ball", "--config", path]) == 0
        plan = json.loads((tmp_path / "out" / "plan.json").read_text())
        assert "dtheta" in plan[0]
        rec = json.loads(
            (tmp_path / "out" / "runlog.jsonl").read_text().splitlines()[0])
        assert {"E_max", "max_E", "h", "V", "entropy", "lost_mass", "dtheta"} <= set(rec)

    def test_infeasible_catch_exit_two(self, tmp_path):
        out = str(tmp_path / "out")
        doc = ball_doc(out, mode="catch", v0_m_s=0.8, dv0_m_s=0.5, beta_max=5.0)
        doc["trajectory"] = {"kind": "retreat", "horizon_s": 3.0}
        path = write_config(tmp_path, "c.yaml", doc)
        assert cli.main(["ball", "--config", path]) == 2

    def test_trials_flag_overrides_rollouts(self, tmp_path):
        out = str(tmp_path / "out")
        path = write_config(tmp_path, "c.yaml", ball_doc(out))
        assert cli.main(["ball", "--config", path, "--trials", "2"]) == 0
        rows = (tmp_path / "out" / "rollouts.csv").read_text().splitlines()
        assert len(rows) == 3  # header + 2


class TestSweepCommand:
    def test_writes_csv(self, tmp_path):
        out = str(tmp_path / "out")
        doc = {
            "task": "sweep",
            "v0_grid": [0.8],
            "dv0_grid": [0.05, 0.5],
            "beta_grid": [5.0],
            "trials": 2,
            "out": out,
        }
        path = write_config(tmp_path, "c.yaml", doc)
        assert cli.main(["sweep", "--config", path]) == 0
        rows = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
        assert rows[0] == "v0,dv0,beta_max,success_rate"
        assert len(rows) == 3


class TestRepoConfigs:
    def test_all_repo_configs_load(self):
        root = os.path.join(os.path.dirname(__file__), "..", "configs")
        for name in os.listdir(root):
            if name.endswith(".yaml"):
                load_config(os.path.join(root, name))
