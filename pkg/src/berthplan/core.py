"""Shared domain types, unit conventions and weight configuration.

Internal units are SI throughout (m, s, rad, kg). Knots and degrees only
appear at I/O boundaries. Every 6-vector (states, tolerances, weights) uses
the interleaved ordering ``(x0, u, y0, vm, psi, r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping

import numpy as np

KNOT = 0.514444
GRAVITY = 9.80665

STATE_FIELDS = ("x0", "u", "y0", "vm", "psi", "r")
CONTROL_FIELDS = ("delta", "np", "nbt", "nst")


class ConfigurationError(ValueError):
    """A type invariant was violated while building a configuration object."""


class MissingCoefficientGroup(KeyError):
    """A hydrodynamic coefficient group needed by an active submodel is absent."""

    def __init__(self, group: str):
        super().__init__(group)
        self.group = group

    def __str__(self):
        return f"missing coefficient group '{self.group}'"


def wrap_angle(theta: float) -> float:
    """Map an angle to the half-open interval (-pi, pi]."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    w = math.fmod(theta + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def knots_to_mps(v: float) -> float:
    return float(v) * KNOT


def mps_to_knots(v: float) -> float:
    return float(v) / KNOT


def berthing_speed_tolerance(gross_tonnage: float) -> float:
    """Berthing velocity (m/s) covering 90% of measured berthings for a given GT."""
    if not gross_tonnage > 0:
        raise ValueError("gross tonnage must be positive")
    return 0.279 * gross_tonnage ** (-0.114)


@dataclass(frozen=True)
class ShipState:
    x0: float = 0.0
    u: float = 0.0
    y0: float = 0.0
    vm: float = 0.0
    psi: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        for f in STATE_FIELDS:
            v = float(getattr(self, f))
            if not math.isfinite(v):
                raise ConfigurationError(f"state component {f} is not finite")
            object.__setattr__(self, f, v)
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.u, self.y0, self.vm, self.psi, self.r])

    @classmethod
    def from_array(cls, a) -> "ShipState":
        a = np.asarray(a, dtype=float)
        if a.shape != (6,):
            raise ValueError(f"state vector must have 6 components, got shape {a.shape}")
        return cls(*a.tolist())

    @property
    def speed(self) -> float:
        return math.hypot(self.u, self.vm)


@dataclass(frozen=True)
class ControlInput:
    delta: float = 0.0
    np: float = 0.0
    nbt: float = 0.0
    nst: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.delta, self.np, self.nbt, self.nst], dtype=float)


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    """Piecewise-constant actuator commands, one row per segment of ``segment_duration`` s.

    ``segments`` is an (m, 4) array with columns (delta, np, nbt, nst).
    """

    segments: np.ndarray
    segment_duration: float
    terminal_time: float

    def __post_init__(self):
        seg = np.array(self.segments, dtype=float, copy=True)
        if seg.ndim != 2 or seg.shape[1] != 4 or seg.shape[0] < 1:
            raise ConfigurationError(f"segments must have shape (m, 4), got {seg.shape}")
        seg.flags.writeable = False
        object.__setattr__(self, "segments", seg)
        if not self.segment_duration > 0:
            raise ConfigurationError("segment duration must be positive")
        if not self.terminal_time > 0:
            raise ConfigurationError("terminal time must be positive")
        if self.m * self.segment_duration < self.terminal_time - 1e-9:
            raise ConfigurationError(
                f"{self.m} segments of {self.segment_duration} s do not cover t_f = {self.terminal_time} s")

    @property
    def m(self) -> int:
        return self.segments.shape[0]

    def segment_index(self, t: float) -> int:
        return min(int(math.floor(t / self.segment_duration)), self.m - 1)

    def at(self, t: float) -> ControlInput:
        return ControlInput(*self.segments[self.segment_index(t)].tolist())

    def __eq__(self, other):
        if not isinstance(other, ControlSchedule):
            return NotImplemented
        return (self.segment_duration == other.segment_duration
                and self.terminal_time == other.terminal_time
                and np.array_equal(self.segments, other.segments))


@dataclass(frozen=True)
class WindCondition:
    """True wind; ``gamma_T = 0`` is wind blowing from +x0 towards -x0."""

    gamma_T: float = 0.0
    U_T: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma_T) and math.isfinite(self.U_T)):
            raise ConfigurationError("wind components must be finite")
        if self.U_T < 0:
            raise ConfigurationError("true wind speed must be non-negative")
        object.__setattr__(self, "gamma_T", float(self.gamma_T) % (2.0 * math.pi))
        object.__setattr__(self, "U_T", float(self.U_T))


@dataclass(frozen=True)
class ToleranceVector:
    x0: float = 1.0
    u: float = 0.1
    y0: float = 1.0
    vm: float = 0.1
    psi: float = math.radians(1.0)
    r: float = math.radians(0.0764)

    def __post_init__(self):
        for f in STATE_FIELDS:
            v = float(getattr(self, f))
            object.__setattr__(self, f, v)
            if not math.isfinite(v) or v < 0:
                raise ConfigurationError(f"tolerance {f} must be a finite non-negative number")
            if v == 0 and f != "vm":
                raise ConfigurationError(f"tolerance {f} must be strictly positive")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in STATE_FIELDS])

    @classmethod
    def berthing(cls) -> "ToleranceVector":
        return cls()

    @classmethod
    def unberthing(cls) -> "ToleranceVector":
        # printed as 0.764 deg/s for unberthing (ten times the berthing value)
        return cls(vm=0.0, r=math.radians(0.764))


def dimensional_weights(w_L: float, w_U: float) -> np.ndarray:
    return np.array([1.0 / w_L**2, 1.0 / w_U**2, 1.0 / w_L**2, 1.0 / w_U**2,
                     math.pi**2, w_L**2 / w_U**2])


@dataclass(frozen=True)
class WeightConfig:
    w_L: float
    w_U: float
    L_tol: float
    w_pen: float = 1.0e4
    w_c: float = 1.0e10

    def __post_init__(self):
        for name in ("w_L", "w_U", "L_tol", "w_pen", "w_c"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"weight {name} must be positive and finite")
        if self.w_pen <= 1:
            raise ConfigurationError("w_pen must exceed 1")
        if self.w_c <= self.w_pen:
            raise ConfigurationError("w_c must dominate w_pen")

    @property
    def w_dim(self) -> np.ndarray:
        return dimensional_weights(self.w_L, self.w_U)

    @classmethod
    def for_ship(cls, Lpp: float, reference_speed: float, **kw) -> "WeightConfig":
        """Default weights: w_L = 0.1 Lpp, w_U = half the reference speed, L_tol = 0.5 Lpp."""
        return cls(w_L=0.1 * Lpp, w_U=0.5 * reference_speed, L_tol=kw.pop("L_tol", 0.5 * Lpp), **kw)


@dataclass(frozen=True)
class ShipParameters:
    """Principal particulars. Defaults: the 150 m scaled tanker with side thrusters."""

    Lpp: float = 150.0
    B: float = 24.46
    d: float = 10.06
    Dp: float = 4.20
    A_R: float = 26.58
    D_BT: float = 2.5
    D_ST: float = 2.5
    mass: float = 31_412.0e3
    x_G: float = 15.84
    A_T: float = 213.55
    A_L: float = 1150.50
    L_OA: float = 158.3
    Cb: float = 0.831
    x_BT: float = 60.0
    x_ST: float = -60.0
    rho_water: float = 1025.0
    rho_air: float = 1.225
    u_threshold: float = 2.5722

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            object.__setattr__(self, f.name, v)
            if not math.isfinite(v):
                raise ConfigurationError(f"ship parameter {f.name} is not finite")
        positive = ("Lpp", "B", "d", "Dp", "A_R", "D_BT", "D_ST", "mass", "A_T", "A_L",
                    "L_OA", "Cb", "rho_water", "rho_air", "u_threshold")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"ship parameter {name} must be positive")
        if abs(self.x_G) >= 0.5 * self.Lpp:
            raise ConfigurationError("|x_G| must be smaller than Lpp/2")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# Coefficient groups and the keys each must provide.
COEFFICIENT_SCHEMA: dict[str, tuple[str, ...]] = {
    "added_mass": ("mx_nd", "my_nd", "Jzz_nd", "Izz_nd"),
    "hull": ("R0_fwd", "R0_aft", "Xvv", "Xvr", "Xrr", "Yv", "Yr", "Nv", "Nr", "C_D"),
    "propeller_forward": ("t_P", "w_P0", "x_P_nd", "k0", "k1", "k2"),
    "propeller_reverse": ("t_P", "p0", "p1", "p2", "y0", "y1", "n0", "n1"),
    "rudder": ("t_R", "a_H", "x_H_nd", "x_R_nd", "l_R_nd", "gamma_R", "epsilon", "kappa",
               "eta", "f_alpha"),
    "rudder_third": ("kappa3", "c3", "gamma_R3"),
    "wind": ("X0", "X1", "X3", "X5", "Y1", "Y3", "Y5", "N1", "N2", "N3"),
    "thruster": ("K_TBT", "K_TST", "a_YSB", "a_YST", "a_NSB", "a_NST"),
}

CORE_GROUPS = ("added_mass", "hull", "propeller_forward", "propeller_reverse", "rudder",
               "rudder_third", "thruster")


@dataclass(frozen=True)
class HydroCoefficients:
    """Named coefficient groups. Non-dimensional values use 0.5*rho*L^k*d scaling."""

    groups: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        clean = {}
        for g, vals in self.groups.items():
            if g not in COEFFICIENT_SCHEMA:
                raise ConfigurationError(f"unknown coefficient group '{g}'")
            missing = [k for k in COEFFICIENT_SCHEMA[g] if k not in vals]
            if missing:
                raise ConfigurationError(f"coefficient group '{g}' lacks keys {missing}")
            clean[g] = {k: float(vals[k]) for k in COEFFICIENT_SCHEMA[g]}
            for k, v in clean[g].items():
                if not math.isfinite(v):
                    raise ConfigurationError(f"coefficient {g}.{k} is not finite")
        if "added_mass" in clean and any(v < 0 for v in clean["added_mass"].values()):
            raise ConfigurationError("added masses and moments must be non-negative")
        object.__setattr__(self, "groups", clean)

    def has(self, group: str) -> bool:
        return group in self.groups

    def group(self, name: str) -> dict:
        try:
            return self.groups[name]
        except KeyError:
            raise MissingCoefficientGroup(name) from None

    def require(self, *names: str) -> None:
        for n in names:
            self.group(n)

    def to_dict(self) -> dict:
        return {g: dict(v) for g, v in self.groups.items()}
