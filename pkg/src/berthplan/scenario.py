"""Scenario files: parsing with unit annotations, validation, save, and built-ins.

A scenario is a JSON object. Any scalar may be a plain number (SI) or a
string carrying a unit, e.g. ``"8.0 kn"``, ``"132 deg"``, ``"0.0764 deg/s"``,
``"3.08 Lpp"``. Sections:

    name, mode, notes
    ship            overrides for ShipParameters
    coefficients    built-in coefficient name, file path, or inline groups
    initial_state   x0, u, y0, vm, psi, r
    desired_state   same keys
    tolerance       same keys (defaults depend on mode)
    objective       w_pen, w_c, w_L, w_U, L_tol
    domain          W, U_min, U_max, n_vertices
    bounds          t_f_min, t_f_max, delta_max, np_max, nbt_max, nst_max
    control         m, t_c, dt
    wind            enabled, gamma_T, U_T
    obstacles       list of {name, vertices: [[x0, y0], ...]}
    waypoints       list of {x0, y0, L_tol}
    optimizer       initial_population, max_population, max_evaluations, seed, sigma0, ftarget, threads
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from importlib import resources
from pathlib import Path

from .core import (CORE_GROUPS, KNOT, STATE_FIELDS, ConfigurationError, HydroCoefficients, ShipParameters,
                   ShipState, ToleranceVector, WeightConfig, WindCondition)
from .geometry import DomainConfig, ObstacleSet, Polygon, polygon_problems
from .objective import BERTHING, MODES, UNBERTHING, Waypoint, decision_length
from .optimizer import BoxBounds, OptimizerConfig

BUILTIN_SCENARIOS = ("nanko_berth", "nanko_unberth", "ariake_berth", "ariake_unberth", "nanko_waypoint",
                     "straight_berth")
BUILTIN_COEFFICIENTS = ("tanker_default", "tanker_reverse_bias")


class ScenarioError(ConfigurationError):
    """Validation failed; ``issues`` holds ``(field_path, message)`` pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("\n".join(f"{p}: {m}" for p, m in self.issues))


class UnknownScenario(KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown scenario '{self.name}'; built-ins are: {', '.join(BUILTIN_SCENARIOS)}"


# ---- units -----------------------------------------------------------------

_LENGTH = {"m": 1.0, "km": 1000.0}
_UNITS = {
    "length": _LENGTH,
    "speed": {"m/s": 1.0, "kn": KNOT, "kt": KNOT, "knot": KNOT, "knots": KNOT},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0, "°": math.pi / 180.0},
    "rate": {"rad/s": 1.0, "deg/s": math.pi / 180.0, "°/s": math.pi / 180.0},
    "time": {"s": 1.0, "min": 60.0},
    "revs": {"rps": 1.0, "1/s": 1.0, "rpm": 1.0 / 60.0},
    "area": {"m2": 1.0, "m^2": 1.0},
    "mass": {"kg": 1.0, "t": 1000.0},
    "density": {"kg/m3": 1.0, "kg/m^3": 1.0},
    "none": {},
}
_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")

STATE_DIMS = {"x0": "length", "u": "speed", "y0": "length", "vm": "speed", "psi": "angle", "r": "rate"}
SHIP_DIMS = {"Lpp": "length", "B": "length", "d": "length", "Dp": "length", "A_R": "area", "D_BT": "length",
             "D_ST": "length", "mass": "mass", "x_G": "length", "A_T": "area", "A_L": "area",
             "L_OA": "length", "Cb": "none", "x_BT": "length", "x_ST": "length", "rho_water": "density",
             "rho_air": "density", "u_threshold": "speed"}
BOUND_DIMS = {"t_f_min": "time", "t_f_max": "time", "delta_max": "angle", "np_max": "revs",
              "nbt_max": "revs", "nst_max": "revs"}
BOUND_DEFAULTS = {"t_f_min": 630.0, "t_f_max": 2250.0, "delta_max": math.radians(35.0), "np_max": 2.08,
                  "nbt_max": 4.24, "nst_max": 4.24}


def parse_quantity(value, dim: str, ship: ShipParameters | None = None) -> float:
    """Convert a number or unit-annotated string to SI."""
    if isinstance(value, bool):
        raise ValueError(f"expected a {dim} value, got a boolean")
    if isinstance(value, (int, float)):
        v = float(value)
    elif isinstance(value, str):
        mt = _QTY.match(value)
        if not mt:
            raise ValueError(f"cannot parse quantity {value!r}")
        num, unit = float(mt.group(1)), mt.group(2)
        table = dict(_UNITS[dim])
        if dim == "length" and ship is not None:
            table.update(Lpp=ship.Lpp, B=ship.B)
        if unit == "":
            v = num
        elif unit in table:
            v = num * table[unit]
        else:
            allowed = ", ".join(table) or "none"
            raise ValueError(f"unit '{unit}' is not a {dim} unit (allowed: {allowed})")
    else:
        raise ValueError(f"expected a {dim} value, got {type(value).__name__}")
    if not math.isfinite(v):
        raise ValueError("value must be finite")
    return v


# ---- coefficients ------------------------------------------------------------


def _data_file(kind: str, name: str):
    return resources.files("berthplan").joinpath("data", kind, f"{name}.json")


def coefficient_groups_from_json(doc: dict) -> dict:
    return doc.get("coefficients", doc.get("groups", doc))


def load_coefficients(ref, base_dir: Path | None = None) -> HydroCoefficients:
    """Built-in coefficient set by name, a JSON file path, or an inline mapping."""
    if isinstance(ref, dict):
        return HydroCoefficients(coefficient_groups_from_json(ref), name=ref.get("name", "inline"))
    ref = str(ref)
    if ref in BUILTIN_COEFFICIENTS:
        doc = json.loads(_data_file("coefficients", ref).read_text())
        return HydroCoefficients(coefficient_groups_from_json(doc), name=ref)
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    if not path.exists():
        raise FileNotFoundError(f"coefficient file '{ref}' not found; built-ins are: "
                                f"{', '.join(BUILTIN_COEFFICIENTS)}")
    doc = json.loads(path.read_text())
    return HydroCoefficients(coefficient_groups_from_json(doc), name=str(path.resolve()))


# ---- scenario ----------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    name: str
    mode: str
    x_int: ShipState
    x_des: ShipState
    tol: ToleranceVector
    weights: WeightConfig
    wind: WindCondition
    wind_enabled: bool
    obstacles: ObstacleSet
    domain_cfg: DomainConfig
    waypoints: tuple
    bounds: BoxBounds
    m: int
    t_c: float
    dt: float
    ship: ShipParameters
    coeffs: HydroCoefficients
    coeffs_ref: object = "tanker_default"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    notes: tuple = ()

    def __post_init__(self):
        issues = scenario_problems(self)
        if issues:
            raise ScenarioError(issues)

    @cached_property
    def compiled(self):
        from .objective import CompiledProblem

        return CompiledProblem(self)

    def with_changes(self, **kw) -> "Scenario":
        return replace(self, **kw)

    @property
    def n_decision(self) -> int:
        return decision_length(self.m)


def scenario_problems(s: Scenario) -> list[tuple[str, str]]:
    """Cross-field checks that the component types cannot do on their own."""
    out = []
    if s.mode not in MODES:
        out.append(("mode", f"must be one of {MODES}, got {s.mode!r}"))
    if s.m < 1:
        out.append(("control.m", "must be at least 1"))
    if not s.t_c > 0:
        out.append(("control.t_c", "must be positive"))
    if not s.dt > 0:
        out.append(("control.dt", "must be positive"))
    if len(s.bounds) != decision_length(max(s.m, 1)):
        out.append(("bounds", f"length {len(s.bounds)} does not match 4m+1 = {decision_length(s.m)}"))
    elif s.m * s.t_c < s.bounds.upper[0] - 1e-9:
        out.append(("bounds.t_f_max", f"{s.bounds.upper[0]} s exceeds the schedule horizon m*t_c = "
                                      f"{s.m * s.t_c} s"))
    if s.domain_cfg.Lpp != s.ship.Lpp or s.domain_cfg.B != s.ship.B:
        out.append(("domain", "domain hull dimensions differ from ship.Lpp / ship.B"))
    p = (s.x_int.x0, s.x_int.y0)
    for i, poly in enumerate(s.obstacles):
        if poly.contains(p):
            out.append((f"obstacles[{i}]", f"initial midship position {p} lies inside obstacle "
                                           f"'{poly.name}'"))
    required = list(CORE_GROUPS) + (["wind"] if s.wind_enabled else [])
    for g in required:
        if not s.coeffs.has(g):
            out.append((f"coefficients.{g}", f"missing coefficient group '{g}'"))
    return out


def _section(raw: dict, key: str, issues, kind=dict):
    val = raw.get(key, kind())
    if not isinstance(val, kind):
        issues.append((key, f"expected {'an object' if kind is dict else 'a list'}"))
        return kind()
    return val


def _quantities(sec: dict, path: str, dims: dict, issues, ship=None, defaults=None) -> dict:
    out = dict(defaults or {})
    for key, val in sec.items():
        if key not in dims:
            issues.append((f"{path}.{key}", f"unknown field (expected one of {', '.join(dims)})"))
            continue
        try:
            out[key] = parse_quantity(val, dims[key], ship)
        except ValueError as e:
            issues.append((f"{path}.{key}", str(e)))
    return out


def _state(sec: dict, path: str, issues, ship) -> ShipState | None:
    vals = _quantities(sec, path, STATE_DIMS, issues, ship, defaults={k: 0.0 for k in STATE_FIELDS})
    try:
        return ShipState(**vals)
    except ConfigurationError as e:
        issues.append((path, str(e)))
        return None


def scenario_from_dict(raw: dict, base_dir: Path | None = None, name: str | None = None) -> Scenario:
    """Build and validate a Scenario; all problems are reported together."""
    issues: list[tuple[str, str]] = []
    if not isinstance(raw, dict):
        raise ScenarioError([("", "scenario must be a JSON object")])
    known = {"name", "mode", "notes", "ship", "coefficients", "initial_state", "desired_state", "tolerance",
             "objective", "domain", "bounds", "control", "wind", "obstacles", "waypoints", "optimizer"}
    for k in raw:
        if k not in known:
            issues.append((k, "unknown section"))
    name = str(raw.get("name", name or "scenario"))
    mode = raw.get("mode", BERTHING)
    if mode not in MODES:
        issues.append(("mode", f"must be one of {MODES}, got {mode!r}"))
        mode = BERTHING

    ship_vals = _quantities(_section(raw, "ship", issues), "ship", SHIP_DIMS, issues)
    try:
        ship = ShipParameters(**ship_vals)
    except ConfigurationError as e:
        issues.append(("ship", str(e)))
        ship = ShipParameters()

    coeffs_ref = raw.get("coefficients", "tanker_default")
    coeffs = None
    try:
        coeffs = load_coefficients(coeffs_ref, base_dir)
    except (ConfigurationError, FileNotFoundError, json.JSONDecodeError) as e:
        issues.append(("coefficients", str(e)))

    x_int = _state(_section(raw, "initial_state", issues), "initial_state", issues, ship)
    x_des = _state(_section(raw, "desired_state", issues), "desired_state", issues, ship)

    base_tol = ToleranceVector.berthing() if mode == BERTHING else ToleranceVector.unberthing()
    tol_vals = _quantities(_section(raw, "tolerance", issues), "tolerance", STATE_DIMS, issues, ship,
                           defaults={k: getattr(base_tol, k) for k in STATE_FIELDS})
    tol = None
    try:
        tol = ToleranceVector(**tol_vals)
    except ConfigurationError as e:
        issues.append(("tolerance", str(e)))

    obj_dims = {"w_pen": "none", "w_c": "none", "w_L": "length", "w_U": "speed", "L_tol": "length"}
    obj = _quantities(_section(raw, "objective", issues), "objective", obj_dims, issues, ship)
    ref_speed = None
    if x_int is not None and x_des is not None:
        ref_speed = x_int.u if mode == BERTHING else x_des.u
    obj.setdefault("w_L", 0.1 * ship.Lpp)
    if "w_U" not in obj:
        if ref_speed is not None and ref_speed > 0:
            obj["w_U"] = 0.5 * abs(ref_speed)
        else:
            issues.append(("objective.w_U", "cannot default w_U: reference speed is zero; set it explicitly"))
    obj.setdefault("L_tol", 0.5 * ship.Lpp)
    weights = None
    if "w_U" in obj:
        try:
            weights = WeightConfig(**obj)
        except ConfigurationError as e:
            issues.append(("objective", str(e)))

    dom_sec = dict(_section(raw, "domain", issues))
    n_vertices = dom_sec.pop("n_vertices", 13)
    dom = _quantities(dom_sec, "domain", {"W": "length", "U_min": "speed", "U_max": "speed"}, issues, ship)
    domain_cfg = None
    if "W" not in dom:
        issues.append(("domain.W", "minimum passage width is required"))
    else:
        try:
            domain_cfg = DomainConfig(Lpp=ship.Lpp, B=ship.B, n_vertices=int(n_vertices), **dom)
        except (ConfigurationError, TypeError, ValueError) as e:
            issues.append(("domain", str(e)))

    ctl = _section(raw, "control", issues)
    m = ctl.get("m", 25)
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        issues.append(("control.m", f"must be a positive integer, got {m!r}"))
        m = 1
    ctl_q = _quantities({k: v for k, v in ctl.items() if k != "m"}, "control", {"t_c": "time", "dt": "time"},
                        issues, ship, defaults={"t_c": 90.0, "dt": 1.0})

    bnd = _quantities(_section(raw, "bounds", issues), "bounds", BOUND_DIMS, issues, ship,
                      defaults=BOUND_DEFAULTS)
    bounds = None
    try:
        bounds = BoxBounds.for_schedule(m, **bnd)
    except ConfigurationError as e:
        issues.append(("bounds", str(e)))

    wsec = dict(_section(raw, "wind", issues))
    enabled = wsec.pop("enabled", False)
    if not isinstance(enabled, bool):
        issues.append(("wind.enabled", "must be true or false"))
        enabled = False
    wq = _quantities(wsec, "wind", {"gamma_T": "angle", "U_T": "speed"}, issues, ship,
                     defaults={"gamma_T": 0.0, "U_T": 0.0})
    wind = WindCondition()
    try:
        wind = WindCondition(**wq)
    except ConfigurationError as e:
        issues.append(("wind", str(e)))

    polys = []
    for i, ob in enumerate(_section(raw, "obstacles", issues, list)):
        path = f"obstacles[{i}]"
        if not isinstance(ob, dict) or "vertices" not in ob:
            issues.append((path, "expected an object with 'vertices'"))
            continue
        try:
            verts = [(parse_quantity(v[0], "length", ship), parse_quantity(v[1], "length", ship))
                     for v in ob["vertices"]]
        except (ValueError, TypeError, IndexError, KeyError) as e:
            issues.append((f"{path}.vertices", f"vertices must be [x0, y0] pairs ({e})"))
            continue
        probs = polygon_problems(verts)
        if probs:
            issues.append((path, f"polygon '{ob.get('name', '')}' invalid: " + "; ".join(probs)))
            continue
        polys.append(Polygon(tuple(verts), str(ob.get("name", f"obstacle_{i}"))))

    wps = []
    for i, wp in enumerate(_section(raw, "waypoints", issues, list)):
        path = f"waypoints[{i}]"
        if not isinstance(wp, dict):
            issues.append((path, "expected an object"))
            continue
        q = _quantities(wp, path, {"x0": "length", "y0": "length", "L_tol": "length"}, issues, ship,
                        defaults={"L_tol": obj.get("L_tol", 0.5 * ship.Lpp)})
        try:
            wps.append(Waypoint(**q))
        except (ConfigurationError, TypeError) as e:
            issues.append((path, str(e)))

    osec = dict(_section(raw, "optimizer", issues))
    opt = OptimizerConfig()
    okeys = {f.name for f in fields(OptimizerConfig)}
    bad = [k for k in osec if k not in okeys]
    for k in bad:
        issues.append((f"optimizer.{k}", "unknown field"))
    try:
        opt = OptimizerConfig(**{k: v for k, v in osec.items() if k in okeys})
    except (ConfigurationError, TypeError) as e:
        issues.append(("optimizer", str(e)))

    notes = raw.get("notes", [])
    notes = (notes,) if isinstance(notes, str) else tuple(str(n) for n in notes)

    if issues or None in (x_int, x_des, tol, weights, domain_cfg, bounds, coeffs):
        raise ScenarioError(issues or [("", "invalid scenario")])
    return Scenario(name=name, mode=mode, x_int=x_int, x_des=x_des, tol=tol, weights=weights, wind=wind,
                    wind_enabled=enabled, obstacles=ObstacleSet(tuple(polys)), domain_cfg=domain_cfg,
                    waypoints=tuple(wps), bounds=bounds, m=m, t_c=ctl_q["t_c"], dt=ctl_q["dt"], ship=ship,
                    coeffs=coeffs, coeffs_ref=coeffs_ref, optimizer=opt, notes=notes)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError([("", f"{path}: JSON parse error at line {e.lineno}: {e.msg}")]) from None
    return scenario_from_dict(raw, base_dir=path.parent, name=path.stem)


def builtin(name: str) -> Scenario:
    if name not in BUILTIN_SCENARIOS:
        raise UnknownScenario(name)
    raw = json.loads(_data_file("scenarios", name).read_text())
    return scenario_from_dict(raw, name=name)


def resolve(ref: str) -> Scenario:
    """A built-in name or a path to a scenario file."""
    if ref in BUILTIN_SCENARIOS:
        return builtin(ref)
    p = Path(ref)
    if p.suffix == ".json" or p.exists():
        return load_scenario(p)
    raise UnknownScenario(ref)


def scenario_to_dict(s: Scenario) -> dict:
    """Plain-SI representation that :func:`scenario_from_dict` reads back to an equal Scenario."""
    state = lambda st: {k: getattr(st, k) for k in STATE_FIELDS}  # noqa: E731
    b = s.bounds
    opt = {f.name: getattr(s.optimizer, f.name) for f in fields(OptimizerConfig)}
    coeffs_ref = s.coeffs_ref
    if not isinstance(coeffs_ref, dict) and str(coeffs_ref) not in BUILTIN_COEFFICIENTS:
        coeffs_ref = s.coeffs.name or coeffs_ref
    return {
        "name": s.name,
        "mode": s.mode,
        "notes": list(s.notes),
        "ship": s.ship.to_dict(),
        "coefficients": coeffs_ref,
        "initial_state": state(s.x_int),
        "desired_state": state(s.x_des),
        "tolerance": state(s.tol),
        "objective": {"w_pen": s.weights.w_pen, "w_c": s.weights.w_c, "w_L": s.weights.w_L,
                      "w_U": s.weights.w_U, "L_tol": s.weights.L_tol},
        "domain": {"W": s.domain_cfg.W, "U_min": s.domain_cfg.U_min, "U_max": s.domain_cfg.U_max,
                   "n_vertices": s.domain_cfg.n_vertices},
        "bounds": {"t_f_min": float(b.lower[0]), "t_f_max": float(b.upper[0]),
                   "delta_max": float(b.upper[1]), "np_max": float(b.upper[1 + s.m]),
                   "nbt_max": float(b.upper[1 + 2 * s.m]), "nst_max": float(b.upper[1 + 3 * s.m])},
        "control": {"m": s.m, "t_c": s.t_c, "dt": s.dt},
        "wind": {"enabled": s.wind_enabled, "gamma_T": s.wind.gamma_T, "U_T": s.wind.U_T},
        "obstacles": [{"name": p.name, "vertices": [list(v) for v in p.vertices]} for p in s.obstacles],
        "waypoints": [{"x0": w.x0, "y0": w.y0, "L_tol": w.L_tol} for w in s.waypoints],
        "optimizer": opt,
    }


def save_scenario(s: Scenario, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")
    return path
