"""CMA-ES with clamp repair and increasing-population restarts.

The search runs in bound-normalized coordinates z in [0, 1]^n. A candidate
outside the unit box is clamped before evaluation and the squared distance
to its clamp is added to the value the strategy ranks on; best-ever
tracking uses the plain objective value at the clamped point.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import ConfigurationError


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BoxBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float)
        hi = np.array(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ConfigurationError("bounds: lower and upper must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ConfigurationError("bounds: values must be finite")
        bad = np.nonzero(~(lo < hi))[0]
        if bad.size:
            raise ConfigurationError(f"bounds: lower < upper violated at index {int(bad[0])}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def __len__(self):
        return self.lower.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BoxBounds):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def to_unit(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lower) / self.width

    def from_unit(self, z) -> np.ndarray:
        return self.lower + np.asarray(z, dtype=float) * self.width

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    @classmethod
    def for_schedule(cls, m: int, t_f_min: float = 630.0, t_f_max: float = 2250.0,
                     delta_max: float = math.radians(35.0), np_max: float = 2.08,
                     nbt_max: float = 4.24, nst_max: float = 4.24) -> "BoxBounds":
        """Bounds over X = (t_f, delta_1..m, np_1..m, nbt_1..m, nst_1..m)."""
        hi = np.concatenate([[t_f_max], np.full(m, delta_max), np.full(m, np_max),
                             np.full(m, nbt_max), np.full(m, nst_max)])
        lo = np.concatenate([[t_f_min], -hi[1:]])
        return cls(lo, hi)


def repair_to_box(x, b: BoxBounds) -> tuple[np.ndarray, float]:
    """Clamp into the box; penalty is the squared clamp distance in normalized units."""
    x = np.asarray(x, dtype=float)
    xf = np.clip(x, b.lower, b.upper)
    pen = float(np.sum(((x - xf) / b.width) ** 2))
    return xf, pen


@dataclass(frozen=True)
class OptimizerConfig:
    initial_population: int = 20
    max_population: int = 240
    max_evaluations: int = 300_000
    seed: int = 0
    sigma0: float = 0.3
    tol_fun_hist: float = 1e-12
    tol_sigma: float = 1e-12
    max_condition: float = 1e14
    ftarget: float | None = None
    threads: int = 1

    def __post_init__(self):
        if self.initial_population < 4:
            raise ConfigurationError("optimizer.initial_population must be at least 4")
        if self.max_population < self.initial_population:
            raise ConfigurationError("optimizer.max_population must be >= initial_population")
        if self.max_evaluations < 1:
            raise ConfigurationError("optimizer.max_evaluations must be positive")
        if not self.sigma0 > 0:
            raise ConfigurationError("optimizer.sigma0 must be positive")
        if self.threads < 1:
            raise ConfigurationError("optimizer.threads must be >= 1")


@dataclass(frozen=True)
class RestartEvent:
    generation: int
    evaluations: int
    trigger: str
    population: int


@dataclass
class OptimizationResult:
    best_x: np.ndarray
    best_f: float
    evaluations: int
    history: list = field(default_factory=list)  # one dict per generation
    restarts: list = field(default_factory=list)  # RestartEvent, one per restart
    populations: list = field(default_factory=list)  # population size of every run, in order
    stop_reason: str = ""
    wall_time: float = 0.0
    best_breakdown: object = None

    @property
    def best_history(self) -> np.ndarray:
        return np.array([h["gen_best"] for h in self.history])


class _Run:
    """State of one CMA-ES run (fixed population size)."""

    def __init__(self, n: int, lam: int, mean: np.ndarray, sigma: float):
        self.n = n
        self.lam = lam
        self.mu = lam // 2
        w = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.w = w / w.sum()
        self.mueff = 1.0 / np.sum(self.w ** 2)
        mueff = self.mueff
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chiN = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
        self.mean = mean.copy()
        self.sigma = sigma
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.gen = 0
        self.best_hist: list[float] = []

    def ask(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        z = rng.standard_normal((self.lam, self.n))
        y = (z * self.D) @ self.B.T
        return self.mean + self.sigma * y, y

    def tell(self, y: np.ndarray, ranked: np.ndarray) -> None:
        n = self.n
        ysel = y[ranked[: self.mu]]
        yw = self.w @ ysel
        self.mean = self.mean + self.sigma * yw
        # C^{-1/2} yw
        invsqrt_yw = self.B @ ((self.B.T @ yw) / self.D)
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * invsqrt_yw
        self.gen += 1
        norm_ps = float(np.linalg.norm(self.ps))
        hsig = norm_ps / math.sqrt(1 - (1 - self.cs) ** (2 * self.gen)) / self.chiN < 1.4 + 2 / (n + 1)
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * yw
        rank_mu = (ysel.T * self.w) @ ysel
        dh = (1 - hsig) * self.cc * (2 - self.cc)
        self.C = ((1 - self.c1 - self.cmu + self.c1 * dh) * self.C
                  + self.c1 * np.outer(self.pc, self.pc) + self.cmu * rank_mu)
        self.sigma *= math.exp((self.cs / self.damps) * (norm_ps / self.chiN - 1))
        self.C = 0.5 * (self.C + self.C.T)
        evals, vecs = np.linalg.eigh(self.C)
        self.D = np.sqrt(np.maximum(evals, 0.0))
        self.B = vecs

    @property
    def condition(self) -> float:
        dmin = float(self.D.min())
        if dmin <= 0:
            return math.inf
        return float(self.D.max() / dmin) ** 2

    def stagnation(self, cfg: OptimizerConfig) -> str | None:
        window = 10 + math.ceil(30 * self.n / self.lam)
        if len(self.best_hist) >= window:
            recent = self.best_hist[-window:]
            if max(recent) - min(recent) < cfg.tol_fun_hist:
                return "flat_fitness_history"
        if self.sigma * float(self.D.max()) < cfg.tol_sigma:
            return "step_size_floor"
        if not self.condition <= cfg.max_condition:
            return "condition_number"
        if not (np.all(np.isfinite(self.mean)) and math.isfinite(self.sigma)):
            return "numerical_breakdown"
        return None


def minimize(fun: Callable[[np.ndarray], float], bounds: BoxBounds, cfg: OptimizerConfig = OptimizerConfig(),
             progress: Callable[[dict], None] | None = None) -> OptimizationResult:
    """Minimize ``fun`` over ``bounds`` until the evaluation budget or ``ftarget`` is reached."""
    t_start = time.perf_counter()
    n = len(bounds)
    rng = np.random.default_rng(cfg.seed)
    lam = cfg.initial_population
    run = _Run(n, lam, rng.uniform(0.0, 1.0, n), cfg.sigma0)
    result = OptimizationResult(best_x=bounds.from_unit(run.mean), best_f=math.inf, evaluations=0,
                                populations=[lam])
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    generation = 0

    def emit(rec):
        if progress is not None:
            progress(rec)

    def evaluate_batch(xs):
        if pool is None:
            vals = [fun(x) for x in xs]
        else:
            vals = list(pool.map(fun, xs))
        out = np.array([float(v) for v in vals])
        if not np.all(np.isfinite(out)):
            k = int(np.nonzero(~np.isfinite(out))[0][0])
            raise OptimizationError(f"objective returned {out[k]!r} at generation {generation}; "
                                    "objectives must be finite (use a sentinel for failures)")
        return out

    try:
        while True:
            remaining = cfg.max_evaluations - result.evaluations
            if remaining <= 0:
                result.stop_reason = "max_evaluations"
                break
            zs, ys = run.ask(rng)
            k = min(run.lam, remaining)
            zf = np.clip(zs[:k], 0.0, 1.0)
            pen = np.sum((zs[:k] - zf) ** 2, axis=1)
            xs = [bounds.from_unit(z) for z in zf]
            fvals = evaluate_batch(xs)
            result.evaluations += k
            generation += 1
            ib = int(np.argmin(fvals))
            if fvals[ib] < result.best_f:
                result.best_f = float(fvals[ib])
                result.best_x = xs[ib]
            rec = {"iteration": generation, "evaluations": result.evaluations, "gen_best": float(fvals[ib]),
                   "best": result.best_f, "sigma": run.sigma, "popsize": run.lam, "restart": len(result.restarts)}
            result.history.append(rec)
            emit({"event": "generation", **rec})
            if cfg.ftarget is not None and result.best_f <= cfg.ftarget:
                result.stop_reason = "ftarget"
                break
            if k < run.lam:
                result.stop_reason = "max_evaluations"
                break
            ranked = np.argsort(fvals + pen, kind="stable")
            run.best_hist.append(float(fvals[ib]))
            run.tell(ys, ranked)
            trigger = run.stagnation(cfg)
            if trigger is not None:
                lam = min(2 * run.lam, cfg.max_population)
                ev = RestartEvent(generation, result.evaluations, trigger, lam)
                result.restarts.append(ev)
                result.populations.append(lam)
                emit({"event": "restart", "iteration": generation, "evaluations": result.evaluations,
                      "trigger": trigger, "popsize": lam})
                run = _Run(n, lam, rng.uniform(0.0, 1.0, n), cfg.sigma0)
    finally:
        if pool is not None:
            pool.shutdown()
    result.wall_time = time.perf_counter() - t_start
    return result


def plan(scenario, cfg: OptimizerConfig | None = None, progress=None) -> OptimizationResult:
    """Optimize a scenario's decision vector and attach the objective breakdown of the best X."""
    from .objective import compile_problem

    cfg = cfg if cfg is not None else scenario.optimizer
    problem = compile_problem(scenario)
    res = minimize(problem, scenario.bounds, cfg, progress)
    res.best_breakdown = problem.breakdown(res.best_x)[0]
    return res
