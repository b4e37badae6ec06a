import csv
import json

import numpy as np
import pytest

from berthplan.cli import CONVERGENCE_COLUMNS, TRAJECTORY_COLUMNS, main
from berthplan.scenario import builtin, save_scenario, scenario_to_dict, load_coefficients


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


def rest_scenario(tmp_path):
    """Obstacle-free copy of straight_berth with the ship at rest."""
    d = scenario_to_dict(builtin("straight_berth"))
    d["obstacles"] = []
    d["initial_state"] = dict.fromkeys(d["initial_state"], 0.0)
    d["objective"]["w_U"] = 1.0
    p = tmp_path / "rest.json"
    p.write_text(json.dumps(d))
    return p


class TestCheck:
    @pytest.mark.parametrize("name", ["nanko_berth", "nanko_unberth", "ariake_berth", "ariake_unberth",
                                      "nanko_waypoint", "straight_berth"])
    def test_builtins_clean(self, name, capsys):
        assert main(["check", "--scenario", name]) == 0
        assert "ok" in capsys.readouterr().out

    def test_narrow_port(self, tmp_path, capsys):
        d = scenario_to_dict(builtin("nanko_berth"))
        d["domain"]["W"] = "1 Lpp"
        p = tmp_path / "narrow.json"
        p.write_text(json.dumps(d))
        assert main(["check", "--scenario", str(p)]) == 1
        assert "domain" in capsys.readouterr().out

    def test_missing_group(self, tmp_path, capsys):
        d = scenario_to_dict(builtin("nanko_berth"))
        groups = load_coefficients("tanker_default").to_dict()
        del groups["thruster"]
        d["coefficients"] = {"coefficients": groups}
        p = tmp_path / "nothr.json"
        p.write_text(json.dumps(d))
        assert main(["check", "--scenario", str(p)]) == 1
        assert "thruster" in capsys.readouterr().out

    def test_unknown_builtin(self, capsys):
        assert main(["check", "--scenario", "kobe_berth"]) == 2
        code = main(["plan", "--scenario", "kobe_berth"])
        assert code == 2
        assert "nanko_berth" in capsys.readouterr().err


class TestUsage:
    def test_no_command(self):
        assert main([]) == 2

    def test_bad_flag(self):
        assert main(["plan", "--scenario", "straight_berth", "--budget", "many"]) == 2

    def test_bad_budget(self):
        assert main(["plan", "--scenario", "straight_berth", "--budget", "0"]) == 2


class TestDomain:
    def test_nanko_rings(self, tmp_path, capsys):
        assert main(["domain", "--scenario", "nanko_berth", "--speeds", "0,3.5 kn,6 kn", "--out", str(tmp_path)]) == 0
        rows = read_rows(tmp_path / "domain.csv")
        assert rows[0] == ["speed_mps", "speed_kn", "vertex", "alpha_deg", "x", "y"]
        bow = [float(r[4]) for r in rows[1:] if r[2] == "0"]
        assert bow == pytest.approx([112.5, 229.5, 346.5])
        assert len(rows) == 1 + 3 * 13
        assert (tmp_path / "domain.svg").exists()

    def test_empty_list(self, tmp_path):
        assert main(["domain", "--scenario", "nanko_berth", "--speeds", "", "--out", str(tmp_path),
                     "--no-plots"]) == 0
        assert len(read_rows(tmp_path / "domain.csv")) == 1

    def test_negative_speed(self, tmp_path):
        assert main(["domain", "--scenario", "nanko_berth", "--speeds", "-1 kn", "--out", str(tmp_path)]) == 2


class TestSimulate:
    def test_rest_constant(self, tmp_path):
        sc = rest_scenario(tmp_path)
        X = np.zeros(41)
        X[0] = 300.0
        sched = tmp_path / "x.txt"
        sched.write_text(" ".join(map(str, X)))
        out = tmp_path / "sim"
        assert main(["simulate", "--scenario", str(sc), "--schedule", str(sched), "--out", str(out),
                     "--no-plots"]) == 0
        rows = read_rows(out / "trajectory.csv")
        assert tuple(rows[0]) == TRAJECTORY_COLUMNS
        body = np.array(rows[1:], dtype=float)
        assert body.shape == (301, 12)
        assert np.all(body[:, 1:] == 0.0)
        assert (out / "trajectory.csv").read_text().startswith("#")

    def test_wrong_length(self, tmp_path, capsys):
        sched = tmp_path / "x.txt"
        sched.write_text("300 0 0")
        assert main(["simulate", "--scenario", "straight_berth", "--schedule", str(sched),
                     "--out", str(tmp_path / "o")]) == 2
        assert "41" in capsys.readouterr().err


class TestPlan:
    def _plan(self, out, budget=600, seed=3, extra=()):
        return main(["plan", "--scenario", "straight_berth", "--seed", str(seed), "--budget", str(budget),
                     "--out", str(out), *extra])

    def test_outputs_and_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self._plan(a) == 0
        assert self._plan(b, extra=("--no-plots",)) == 0
        for name in ("trajectory.csv", "control.csv", "convergence.csv", "best_x.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
        rep = json.loads((a / "report.json").read_text())
        assert rep["evaluations"] == 600 and rep["seed"] == 3
        assert set(rep["breakdown"]) >= {"J", "terminal_term", "collision_term", "waypoint_term", "t_f"}
        assert tuple(read_rows(a / "convergence.csv")[0]) == CONVERGENCE_COLUMNS
        for svg in ("trajectory.svg", "controls.svg", "convergence.svg"):
            assert (a / svg).read_text().lstrip().startswith("<?xml")
        assert not (b / "trajectory.svg").exists()
        events = [json.loads(ln) for ln in (a / "progress.jsonl").read_text().splitlines()]
        assert events[0]["event"] == "generation"

    def test_replay_matches_report(self, tmp_path):
        a = tmp_path / "a"
        assert self._plan(a) == 0
        rep = json.loads((a / "report.json").read_text())
        out = tmp_path / "replay"
        assert main(["simulate", "--scenario", "straight_berth", "--schedule", str(a / "best_x.json"),
                     "--out", str(out), "--no-plots"]) == 0
        rep2 = json.loads((out / "report.json").read_text())
        assert rep2["breakdown"]["J"] == rep["breakdown"]["J"]
        assert (out / "trajectory.csv").read_bytes() == (a / "trajectory.csv").read_bytes()

    def test_threads_flag(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self._plan(a, budget=200, extra=("--no-plots",)) == 0
        assert self._plan(b, budget=200, extra=("--no-plots", "--threads", "2")) == 0
        assert (a / "best_x.json").read_bytes() == (b / "best_x.json").read_bytes()

    @pytest.mark.slow
    def test_nanko_smoke(self, tmp_path):
        out = tmp_path / "n"
        assert main(["plan", "--scenario", "nanko_berth", "--seed", "1", "--budget", "20000", "--out", str(out),
                     "--no-plots"]) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["evaluations"] == 20000
        assert np.isfinite(rep["breakdown"]["J"])
        print("nanko smoke: C =", rep["breakdown"]["C"], "feasible =", rep["feasible"])


def test_save_scenario_usable_by_cli(tmp_path):
    p = save_scenario(builtin("ariake_berth"), tmp_path / "a.json")
    assert main(["check", "--scenario", str(p)]) == 0
