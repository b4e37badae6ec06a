"""Compare compiled and interpreted kernels.

Runs itself in two child processes, one with BERTHPLAN_DISABLE_NUMBA=1, and
prints per-kernel timings side by side:

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeat):
    fn()  # warm-up (includes JIT compilation when numba is active)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def measure(repeat):
    from berthplan import _accel
    from berthplan.core import ShipState
    from berthplan.geometry import penetration_length
    from berthplan.objective import compile_problem
    from berthplan.scenario import builtin

    rng = np.random.default_rng(0)
    out = {"backend": _accel.backend_name(), "seconds": {}}

    for name in ("straight_berth", "nanko_berth"):
        sc = builtin(name)
        prob = compile_problem(sc)
        X = rng.uniform(sc.bounds.lower, sc.bounds.upper)
        X[0] = sc.bounds.upper[0]
        out["seconds"][f"evaluate[{name}, t_f={X[0]:.0f}s]"] = _time(lambda: prob(X), repeat)

    poly = builtin("nanko_berth").obstacles.obstacles[0]
    pts = rng.uniform(-3000, 1000, size=(2000, 2))
    out["seconds"]["penetration_length x2000"] = _time(lambda: [penetration_length(p, poly) for p in pts],
                                                       repeat)
    sc = builtin("nanko_berth")
    prob = compile_problem(sc)
    from berthplan.dynamics import derivative_packed
    x = ShipState(u=3.0, vm=0.1, r=0.002).as_array()
    c = np.array([0.1, 1.5, 0.0, 0.0])
    out["seconds"]["derivative x1000"] = _time(
        lambda: [derivative_packed(x, c, prob.wind, prob.P) for _ in range(1000)], repeat)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        json.dump(measure(args.repeat), sys.stdout)
        return
    results = {}
    for disable in (False, True):
        env = dict(os.environ)
        env.pop("BERTHPLAN_DISABLE_NUMBA", None)
        if disable:
            env["BERTHPLAN_DISABLE_NUMBA"] = "1"
        res = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)], env=env,
                             capture_output=True, text=True, check=True)
        r = json.loads(res.stdout)
        results[r["backend"]] = r["seconds"]
    keys = next(iter(results.values())).keys()
    fast, slow = results.get("numba"), results.get("python")
    print(f"{'kernel':44s} {'numba [ms]':>12s} {'python [ms]':>12s} {'speed-up':>9s}")
    for k in keys:
        f = fast[k] * 1e3 if fast else float("nan")
        s = slow[k] * 1e3
        print(f"{k:44s} {f:12.3f} {s:12.1f} {s / f:8.1f}x")


if __name__ == "__main__":
    main()
