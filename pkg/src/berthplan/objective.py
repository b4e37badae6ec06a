"""Scalar objective for direct shooting: decode X, roll out, score.

J = (J1 + J_WP) * t_f + w_c * C

J1 rewards arriving inside the tolerance band (constant cost per unit time)
and punishes misses quadratically with the multiplier w_pen; C is the
time-integrated domain penetration; J_WP is the optional waypoint term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ConfigurationError, ControlSchedule, ShipState, ToleranceVector, WeightConfig, wrap_angle
from .dynamics import Trajectory, pack_model, rollout_packed

BERTHING = "berthing"
UNBERTHING = "unberthing"
MODES = (BERTHING, UNBERTHING)

# Divergent rollouts score here: far above any reachable collision value, still finite.
SENTINEL = 1.0e30


@dataclass(frozen=True)
class Waypoint:
    x0: float
    y0: float
    L_tol: float = 75.0

    def __post_init__(self):
        for name in ("x0", "y0", "L_tol"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ConfigurationError(f"waypoint {name} must be finite")
            object.__setattr__(self, name, v)
        if self.L_tol <= 0:
            raise ConfigurationError("waypoint tolerance radius must be positive")


@dataclass(frozen=True)
class ObjectiveBreakdown:
    J: float
    terminal_term: float
    collision_term: float
    waypoint_term: float
    t_f: float
    feasible: bool
    J1: float = 0.0
    J_WP: float = 0.0
    C: float = 0.0
    deviation: tuple = ()
    within_tolerance: tuple = ()
    diverged: bool = False
    failure_time: float | None = None

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


# ---- decision vector -------------------------------------------------------


def decision_length(m: int) -> int:
    return 4 * m + 1


def decode(X, m: int, t_c: float) -> tuple[float, ControlSchedule]:
    """Split X = (t_f, delta_1..m, np_1..m, nbt_1..m, nst_1..m)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 1 or X.shape[0] != decision_length(m):
        raise ConfigurationError(f"decision vector must have length 4m+1 = {decision_length(m)}, "
                                 f"got {X.shape[0] if X.ndim == 1 else X.shape}")
    t_f = float(X[0])
    segments = X[1:].reshape(4, m).T
    return t_f, ControlSchedule(segments, t_c, t_f)


def encode(t_f: float, schedule: ControlSchedule) -> np.ndarray:
    return np.concatenate([[float(t_f)], np.asarray(schedule.segments).T.ravel()])


# ---- terminal term ---------------------------------------------------------


def terminal_deviation(x_end: ShipState, x_des: ShipState) -> np.ndarray:
    dev = x_des.as_array() - x_end.as_array()
    dev[4] = wrap_angle(dev[4])
    return dev


def terminal_satisfied(dev, mode: str, tol: ToleranceVector) -> np.ndarray:
    dev = np.asarray(dev, dtype=float)
    t = tol.as_array()
    ok = np.abs(dev) <= t
    if mode == UNBERTHING:
        # exit speed is a floor: surplus is fine, only a shortfall counts
        ok[1] = dev[1] <= t[1]
    elif mode != BERTHING:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    return ok


def terminal_penalty(dev, mode: str, tol: ToleranceVector, w: WeightConfig) -> float:
    dev = np.asarray(dev, dtype=float)
    ok = terminal_satisfied(dev, mode, tol)
    t = tol.as_array()
    terms = np.where(ok, t * t, w.w_pen * dev * dev)
    return float(np.dot(w.w_dim, terms))


# ---- path terms ------------------------------------------------------------


def trapezoid(y, t) -> float:
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if y.shape[0] < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def collision_penalty(traj: Trajectory) -> float:
    return trapezoid(traj.penalty, traj.times)


def _waypoint_penalty_xy(x, y, wps: Sequence[Waypoint], w_dim1: float) -> float:
    total = 0.0
    for wp in wps:
        d = float(np.sqrt(np.min((x - wp.x0) ** 2 + (y - wp.y0) ** 2)))
        total += w_dim1 * (wp.L_tol ** 2 if d <= wp.L_tol else d * d)
    return total


def waypoint_penalty(traj: Trajectory, wps: Sequence[Waypoint], w: WeightConfig) -> float:
    if not wps:
        return 0.0
    return _waypoint_penalty_xy(traj.states[:, 0], traj.states[:, 2], wps, float(w.w_dim[0]))


# ---- compiled evaluation context ---------------------------------------------


class CompiledProblem:
    """Scenario data flattened once for repeated evaluation."""

    def __init__(self, scenario):
        s = scenario
        self.mode = s.mode
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        self.m = int(s.m)
        self.t_c = float(s.t_c)
        self.dt = float(s.dt)
        self.x_init = s.x_int.as_array()
        self.x_des = s.x_des
        self.tol = s.tol
        self.weights = s.weights
        self.waypoints = tuple(s.waypoints)
        self.wind_enabled = bool(s.wind_enabled)
        self.wind = np.array([s.wind.gamma_T, s.wind.U_T])
        self.P = pack_model(s.ship, s.coeffs, wind_enabled=self.wind_enabled)
        self.domain = s.domain_cfg
        self.obstacles = s.obstacles

    def rollout(self, X, dt: float | None = None):
        t_f, sched = decode(X, self.m, self.t_c)
        out = rollout_packed(self.x_init, sched.segments, self.t_c, t_f, self.dt if dt is None else dt,
                             self.wind, self.P, self.domain, self.obstacles)
        return t_f, sched, out

    def breakdown(self, X, dt: float | None = None) -> tuple[ObjectiveBreakdown, Trajectory | None]:
        t_f, sched, (times, states, seg, pen, fail) = self.rollout(X, dt)
        if not math.isnan(fail) or not np.all(np.isfinite(pen)):
            bd = ObjectiveBreakdown(J=SENTINEL, terminal_term=SENTINEL, collision_term=0.0, waypoint_term=0.0,
                                    t_f=t_f, feasible=False, diverged=True,
                                    failure_time=None if math.isnan(fail) else fail)
            return bd, None
        traj = Trajectory(times, states, np.asarray(sched.segments)[seg], pen)
        w = self.weights
        dev = terminal_deviation(ShipState.from_array(states[-1]), self.x_des)
        ok = terminal_satisfied(dev, self.mode, self.tol)
        J1 = terminal_penalty(dev, self.mode, self.tol, w)
        C = trapezoid(pen, times)
        J_wp = waypoint_penalty(traj, self.waypoints, w)
        terminal_term = J1 * t_f
        waypoint_term = J_wp * t_f
        collision_term = w.w_c * C
        J = terminal_term + waypoint_term + collision_term
        bd = ObjectiveBreakdown(J=J, terminal_term=terminal_term, collision_term=collision_term,
                                waypoint_term=waypoint_term, t_f=t_f, feasible=bool(ok.all() and C == 0.0),
                                J1=J1, J_WP=J_wp, C=C, deviation=tuple(float(v) for v in dev),
                                within_tolerance=tuple(bool(v) for v in ok))
        return bd, traj

    def __call__(self, X) -> float:
        return self.breakdown(X)[0].J


def compile_problem(scenario) -> CompiledProblem:
    cached = getattr(scenario, "compiled", None)
    if isinstance(cached, CompiledProblem):
        return cached
    return CompiledProblem(scenario)


def evaluate(X, scenario, dt: float | None = None) -> ObjectiveBreakdown:
    """Decode, simulate and score one candidate."""
    return compile_problem(scenario).breakdown(X, dt)[0]


def evaluate_with_trajectory(X, scenario, dt: float | None = None):
    return compile_problem(scenario).breakdown(X, dt)


def objective(scenario):
    """Plain callable X -> J for the optimizer."""
    return compile_problem(scenario)
