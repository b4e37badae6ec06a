"""Time-optimal berthing and unberthing trajectory planning.

Direct shooting over piecewise-constant actuator schedules, a 3-DOF MMG ship
model with wind and side thrusters, a speed-scaled elliptical ship domain for
collision penalties, and CMA-ES with restarts.
"""
__version__ = "0.1.0"

from .core import (KNOT, ControlInput, ControlSchedule, HydroCoefficients, ShipParameters, ShipState,
                   ToleranceVector, WeightConfig, WindCondition, berthing_speed_tolerance, knots_to_mps,
                   mps_to_knots, wrap_angle)
from .geometry import DomainConfig, ObstacleSet, Polygon, domain_margins, domain_vertices, instantaneous_penalty
from .dynamics import Trajectory, simulate
from .objective import ObjectiveBreakdown, Waypoint, decode, encode, evaluate
from .optimizer import BoxBounds, OptimizationResult, OptimizerConfig, minimize, plan
from .scenario import Scenario, builtin, load_scenario, save_scenario

__all__ = [
    "KNOT", "ControlInput", "ControlSchedule", "HydroCoefficients", "ShipParameters", "ShipState",
    "ToleranceVector", "WeightConfig", "WindCondition", "berthing_speed_tolerance", "knots_to_mps",
    "mps_to_knots", "wrap_angle", "DomainConfig", "ObstacleSet", "Polygon", "domain_margins",
    "domain_vertices", "instantaneous_penalty", "Trajectory", "simulate", "ObjectiveBreakdown", "Waypoint",
    "decode", "encode", "evaluate", "BoxBounds", "OptimizationResult", "OptimizerConfig", "minimize", "plan",
    "Scenario", "builtin", "load_scenario", "save_scenario",
]
