"""Command-line front end.

    berthplan plan     --scenario NAME|FILE [--seed N] [--budget N] [--dt S] [--threads N] [--out DIR]
    berthplan simulate --scenario NAME|FILE --schedule FILE [--dt S] [--out DIR]
    berthplan domain   --scenario NAME|FILE --speeds "0 kn,3.5 kn,6 kn" [--out DIR]
    berthplan check    --scenario NAME|FILE

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name
from .core import ConfigurationError, ShipState, mps_to_knots
from .dynamics import SimulationError
from .geometry import domain_vertices
from .objective import compile_problem, decision_length
from .optimizer import OptimizationError, OptimizerConfig, minimize
from .scenario import BUILTIN_SCENARIOS, ScenarioError, UnknownScenario, parse_quantity, resolve

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

TRAJECTORY_COLUMNS = ("t", "x0", "y0", "psi_deg", "u", "vm", "r_degps", "delta_deg", "np", "nbt", "nst",
                      "inst_penalty")
CONVERGENCE_COLUMNS = ("iteration", "evaluations", "best_J", "gap_to_min", "step_size", "popsize")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    scenario: str
    seed: int | None
    evaluations: int
    wall_time: float
    breakdown: dict
    terminal_deviation: list
    t_f: float
    feasible: bool
    backend: str = field(default_factory=backend_name)
    files: dict = field(default_factory=dict)
    restarts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ---- writers -----------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trajectory_csv(path: Path, traj) -> Path:
    s = traj.states
    c = traj.controls
    with open(path, "w", newline="") as fh:
        fh.write("# SI units except psi_deg, r_degps, delta_deg (degrees); np, nbt, nst in rev/s; "
                 "inst_penalty in m\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for k in range(len(traj)):
            w.writerow([_fmt(traj.times[k]), _fmt(s[k, 0]), _fmt(s[k, 2]), _fmt(math.degrees(s[k, 4])),
                        _fmt(s[k, 1]), _fmt(s[k, 3]), _fmt(math.degrees(s[k, 5])),
                        _fmt(math.degrees(c[k, 0])), _fmt(c[k, 1]), _fmt(c[k, 2]), _fmt(c[k, 3]),
                        _fmt(traj.penalty[k])])
    return path


def write_control_csv(path: Path, X, scenario) -> Path:
    m, t_c = scenario.m, scenario.t_c
    t_f = float(X[0])
    seg = np.asarray(X[1:]).reshape(4, m).T
    with open(path, "w", newline="") as fh:
        fh.write(f"# t_f = {t_f!r} s; delta in degrees, revolutions in rev/s\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("segment", "t_start", "t_end", "delta_deg", "np", "nbt", "nst", "used"))
        for i in range(m):
            used = i * t_c < t_f or i == 0
            w.writerow([i + 1, _fmt(i * t_c), _fmt((i + 1) * t_c), _fmt(math.degrees(seg[i, 0])),
                        _fmt(seg[i, 1]), _fmt(seg[i, 2]), _fmt(seg[i, 3]), int(used)])
    return path


def write_convergence_csv(path: Path, result) -> Path:
    jmin = result.best_f
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_COLUMNS)
        for h in result.history:
            w.writerow([h["iteration"], h["evaluations"], _fmt(h["gen_best"]), _fmt(h["gen_best"] - jmin),
                        _fmt(h["sigma"]), h["popsize"]])
    return path


def write_x(path: Path, X, scenario_name: str) -> Path:
    path.write_text(json.dumps({"scenario": scenario_name, "X": [float(v) for v in X]}, indent=1) + "\n")
    return path


def read_x(path: Path) -> np.ndarray:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    if isinstance(doc, dict):
        doc = doc.get("X")
    if not isinstance(doc, list):
        raise UsageError(f"{path}: expected a list of numbers or an object with key 'X'")
    return np.array(doc, dtype=float)


# ---- plots -------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "berthplan"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def _draw_obstacles(ax, scenario):
    for poly in scenario.obstacles:
        xy = poly.xy
        # east (y0) on the horizontal axis, north (x0) vertical
        ax.fill(xy[:, 1], xy[:, 0], color="0.75", ec="0.35", lw=0.6)


def plot_trajectory(path: Path, scenario, traj, every: float = 200.0) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 7))
    _draw_obstacles(ax, scenario)
    s = traj.states
    ax.plot(s[:, 2], s[:, 0], "k-", lw=1.2, label="midship path")
    marks = list(np.arange(0.0, traj.times[-1], every)) + [traj.times[-1]]
    for t in marks:
        k = int(np.argmin(np.abs(traj.times - t)))
        ring = domain_vertices(traj.state(k), scenario.domain_cfg).boundary_vertices
        ring = np.vstack([ring, ring[:1]])
        ax.fill(ring[:, 1], ring[:, 0], color="#7fc8f8", alpha=0.35, lw=0.5, ec="#1f78b4")
    for wp in scenario.waypoints:
        ax.add_patch(plt.Circle((wp.y0, wp.x0), wp.L_tol, fill=False, ls="--", color="b"))
    ax.plot([scenario.x_int.y0], [scenario.x_int.x0], "go", label="start")
    ax.plot([scenario.x_des.y0], [scenario.x_des.x0], "r*", ms=10, label="target")
    ax.set_aspect("equal")
    ax.set_xlabel("y0 (east) [m]")
    ax.set_ylabel("x0 (north) [m]")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(scenario.name)
    _save(fig, path)
    plt.close(fig)
    return path


def plot_controls(path: Path, traj) -> Path:
    plt = _pyplot()
    fig, axes = plt.subplots(5, 2, figsize=(10, 11), sharex=True)
    t = traj.times
    s, c = traj.states, traj.controls
    panels = [
        (s[:, 0], "x0 [m]"), (np.degrees(c[:, 0]), "delta [deg]"),
        (s[:, 1], "u [m/s]"), (c[:, 1], "n_p [rps]"),
        (s[:, 2], "y0 [m]"), (c[:, 2], "n_BT [rps]"),
        (s[:, 3], "vm [m/s]"), (c[:, 3], "n_ST [rps]"),
        (np.degrees(s[:, 4]), "psi [deg]"), (np.degrees(s[:, 5]), "r [deg/s]"),
    ]
    for ax, (y, label) in zip(axes.ravel(), panels):
        ax.plot(t, y, lw=1.0)
        ax.set_ylabel(label, fontsize=8)
        ax.grid(alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("t [s]")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
    return path


def plot_convergence(path: Path, result) -> Path:
    plt = _pyplot()
    h = result.history
    it = [r["iteration"] for r in h]
    gb = np.array([r["gen_best"] for r in h])
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    axes[0, 0].semilogy(it, gb)
    axes[0, 0].set_ylabel("best J per iteration")
    axes[0, 1].semilogy(it, np.maximum(gb - result.best_f, 1e-300))
    axes[0, 1].set_ylabel("J - min J")
    axes[1, 0].semilogy(it, [r["sigma"] for r in h])
    axes[1, 0].set_ylabel("step size")
    axes[1, 1].plot(it, [r["popsize"] for r in h])
    axes[1, 1].set_ylabel("population size")
    for ax in axes[1]:
        ax.set_xlabel("iteration")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
    return path


def plot_domain(path: Path, scenario, rings) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 8))
    for U, ring in rings:
        r = np.vstack([ring, ring[:1]])
        ax.plot(r[:, 1], r[:, 0], "o-", ms=3, lw=1, label=f"{mps_to_knots(U):.2f} kn")
    L, B = scenario.ship.Lpp, scenario.ship.B
    hull = np.array([[L / 2, 0], [L / 2 - 0.1 * L, B / 2], [-L / 2, B / 2], [-L / 2, -B / 2],
                     [L / 2 - 0.1 * L, -B / 2], [L / 2, 0]])
    ax.plot(hull[:, 1], hull[:, 0], "k-")
    ax.set_aspect("equal")
    ax.set_xlabel("y [m]")
    ax.set_ylabel("x [m]")
    if rings:
        ax.legend(fontsize=8)
    _save(fig, path)
    plt.close(fig)
    return path


# ---- commands ----------------------------------------------------------------


def _scenario_for_run(args):
    sc = resolve(args.scenario)
    if getattr(args, "dt", None) is not None:
        if not args.dt > 0:
            raise UsageError("--dt must be positive")
        sc = sc.with_changes(dt=float(args.dt))
    return sc


def _report(sc, seed, evals, wall, bd, files, restarts=()) -> RunReport:
    return RunReport(scenario=sc.name, seed=seed, evaluations=evals, wall_time=wall, breakdown=bd.to_dict(),
                     terminal_deviation=list(bd.deviation), t_f=bd.t_f, feasible=bd.feasible, files=files,
                     restarts=list(restarts))


def _outputs_for(sc, X, out: Path, plots: bool, files: dict):
    problem = compile_problem(sc)
    bd, traj = problem.breakdown(X)
    if traj is None:
        raise SimulationError(bd.failure_time if bd.failure_time is not None else float("nan"),
                              "rollout diverged for the given decision vector")
    files["trajectory_csv"] = str(write_trajectory_csv(out / "trajectory.csv", traj))
    files["control_csv"] = str(write_control_csv(out / "control.csv", X, sc))
    if plots:
        files["trajectory_svg"] = str(plot_trajectory(out / "trajectory.svg", sc, traj))
        files["controls_svg"] = str(plot_controls(out / "controls.svg", traj))
    return bd


def cmd_plan(args) -> int:
    sc = _scenario_for_run(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = replace(sc.optimizer, seed=args.seed if args.seed is not None else sc.optimizer.seed,
                  max_evaluations=args.budget if args.budget is not None else sc.optimizer.max_evaluations,
                  threads=args.threads)
    progress_path = out / "progress.jsonl"
    t0 = time.perf_counter()
    with open(progress_path, "w") as prog:
        def progress(rec):
            prog.write(json.dumps(rec) + "\n")
            if args.verbose and (rec["event"] == "restart" or rec["iteration"] % 100 == 0):
                print(json.dumps(rec), file=sys.stderr)

        result = minimize(compile_problem(sc), sc.bounds, cfg, progress)
    files = {"progress": str(progress_path)}
    files["best_x"] = str(write_x(out / "best_x.json", result.best_x, sc.name))
    files["convergence_csv"] = str(write_convergence_csv(out / "convergence.csv", result))
    bd = _outputs_for(sc, result.best_x, out, not args.no_plots, files)
    if not args.no_plots:
        files["convergence_svg"] = str(plot_convergence(out / "convergence.svg", result))
    restarts = [{"generation": r.generation, "evaluations": r.evaluations, "trigger": r.trigger,
                 "population": r.population} for r in result.restarts]
    rep = _report(sc, cfg.seed, result.evaluations, time.perf_counter() - t0, bd, files, restarts)
    (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=1) + "\n")
    print(f"{sc.name}: J = {bd.J:.6g}  t_f = {bd.t_f:.1f} s  C = {bd.C:.4g}  feasible = {bd.feasible}  "
          f"evaluations = {result.evaluations}  ({rep.wall_time:.1f} s)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _scenario_for_run(args)
    X = read_x(Path(args.schedule))
    n = decision_length(sc.m)
    if X.shape != (n,):
        raise UsageError(f"schedule has {X.size} values; scenario '{sc.name}' expects 4m+1 = {n}")
    if not sc.bounds.contains(X):
        raise UsageError("schedule lies outside the scenario bounds")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files = {}
    bd = _outputs_for(sc, X, out, not args.no_plots, files)
    rep = _report(sc, None, 1, time.perf_counter() - t0, bd, files)
    (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=1) + "\n")
    print(f"{sc.name}: J = {bd.J:.6g}  t_f = {bd.t_f:.1f} s  C = {bd.C:.4g}  feasible = {bd.feasible}")
    return EXIT_OK


def _parse_speeds(text: str) -> list[float]:
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        try:
            v = parse_quantity(tok, "speed")
        except ValueError as e:
            raise UsageError(f"--speeds: {e}") from None
        if v < 0:
            raise UsageError(f"--speeds: speed must be non-negative, got {tok!r}")
        out.append(v)
    return out


def cmd_domain(args) -> int:
    sc = resolve(args.scenario)
    speeds = _parse_speeds(args.speeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rings = []
    path = out / "domain.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("speed_mps", "speed_kn", "vertex", "alpha_deg", "x", "y"))
        alpha = sc.domain_cfg.angles[0]
        for U in speeds:
            ring = domain_vertices(ShipState(u=U), sc.domain_cfg).boundary_vertices
            rings.append((U, ring))
            for j, (x, y) in enumerate(ring):
                w.writerow([_fmt(U), _fmt(mps_to_knots(U)), j, _fmt(math.degrees(alpha[j])), _fmt(x), _fmt(y)])
    if not args.no_plots:
        plot_domain(out / "domain.svg", sc, rings)
    for U, ring in rings:
        print(f"{mps_to_knots(U):7.3f} kn: fore {ring[0, 0]:.2f} m")
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        sc = resolve(args.scenario)
    except ScenarioError as e:
        for p, msg in e.issues:
            print(f"{p or '<root>'}: {msg}")
        return EXIT_INVALID
    print(f"{sc.name}: ok ({len(sc.obstacles)} obstacles, {len(sc.waypoints)} waypoints, m = {sc.m}, "
          f"mode = {sc.mode})")
    return EXIT_OK


# ---- entry point -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="berthplan", description="Time-optimal berthing/unberthing planner")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_default):
        sp.add_argument("--scenario", required=True,
                        help=f"built-in name ({', '.join(BUILTIN_SCENARIOS)}) or scenario JSON path")
        sp.add_argument("--out", default=out_default)
        sp.add_argument("--no-plots", action="store_true", help="skip SVG output")

    sp = sub.add_parser("plan", help="optimize a schedule")
    common(sp, "out/plan")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--budget", type=int, help="objective evaluations")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("simulate", help="replay a decision vector")
    common(sp, "out/simulate")
    sp.add_argument("--schedule", required=True, help="best_x.json or whitespace-separated numbers")
    sp.add_argument("--dt", type=float)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("domain", help="ship-domain rings at given speeds")
    common(sp, "out/domain")
    sp.add_argument("--speeds", default="0 kn,3.5 kn,6 kn", help="comma list; plain numbers are m/s")
    sp.set_defaults(func=cmd_domain)

    sp = sub.add_parser("check", help="validate a scenario")
    sp.add_argument("--scenario", required=True)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("berthplan: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "budget", None) is not None and args.budget < 1:
        print("berthplan: error: --budget must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UnknownScenario as e:
        print(f"berthplan: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"berthplan: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        for p, msg in e.issues:
            print(f"{p or '<root>'}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigurationError, FileNotFoundError) as e:
        print(f"berthplan: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (SimulationError, OptimizationError, RuntimeError) as e:
        print(f"berthplan: runtime failure: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
