"""Generate the built-in scenario files under src/berthplan/data/scenarios.

Port outlines are schematic approximations drawn in a berth-aligned local
frame and rotated into the world frame (x0 north, y0 east, origin at the
berthing point). They reproduce the layout features that matter for
planning (entrance opening, turning basin, dead end, moored vessel, landfills)
but are not survey-accurate.

Local frame: ``s`` runs along the berth wall, ``h`` is the wall-normal
pointing from the water onto the quay (h = 0 on the wall line). The berthing
point sits at h = -40 m.

Run:  python3 scripts/build_port_data.py
"""
from __future__ import annotations

import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "berthplan" / "data" / "scenarios"
BERTH_OFFSET = 40.0


def frame(s_bearing_deg: float, h_bearing_deg: float):
    es = (math.cos(math.radians(s_bearing_deg)), math.sin(math.radians(s_bearing_deg)))
    eh = (math.cos(math.radians(h_bearing_deg)), math.sin(math.radians(h_bearing_deg)))

    def to_world(s, h):
        hh = h + BERTH_OFFSET
        return [round(s * es[0] + hh * eh[0], 1), round(s * es[1] + hh * eh[1], 1)]

    return to_world


def rect(name, s0, s1, h0, h1, to_world):
    return {"name": name, "vertices": [to_world(s0, h0), to_world(s1, h0), to_world(s1, h1), to_world(s0, h1)]}


def poly(name, pts, to_world):
    return {"name": name, "vertices": [to_world(s, h) for s, h in pts]}


def nanko_obstacles():
    w = frame(47.0, 317.0)
    return [
        # quay landfill behind the berth, chamfered where ships turn in from the entrance
        poly("north_landfill", [(-1520, 120), (-1400, 0), (800, 0), (800, 700), (-1520, 700)], w),
        rect("south_landfill", -2600, 800, -1200, -500, w),
        rect("dead_end_basin", 420, 800, -500, 0, w),
        rect("west_landfill", -2600, -1990, -500, 700, w),
        rect("moored_vessel", -330, -210, -25, 0, w),
        rect("west_breakwater", -2600, -1990, 700, 740, w),
        rect("east_breakwater", -1520, -900, 700, 740, w),
        # no-go water hugging the breakwater heads
        rect("restricted_west", -1990, -1960, 560, 740, w),
        rect("restricted_east", -1550, -1520, 560, 740, w),
        # far side of the outer passage
        rect("outer_landfill", -3600, 800, 1800, 2300, w),
    ]


def ariake_obstacles():
    w = frame(326.0, 56.0)
    return [
        rect("quay_landfill", -1500, 900, 0, 2700, w),
        rect("south_landfill", -2900, 900, -900, -420, w),
        rect("dead_end_basin", 450, 900, -420, 0, w),
        rect("north_landfill", -2450, -1500, 2700, 3000, w),
        rect("breakwater_south", -2490, -2450, -420, 1960, w),
        rect("breakwater_north", -2490, -2450, 2460, 3000, w),
        rect("restricted_south", -2450, -2410, 1800, 1960, w),
        rect("restricted_north", -2450, -2410, 2460, 2620, w),
    ]


COMMON = {
    "coefficients": "tanker_default",
    "control": {"m": 25, "t_c": "90 s", "dt": "1 s"},
    "bounds": {"t_f_min": "630 s", "t_f_max": "2250 s", "delta_max": "35 deg", "np_max": "2.08 rps",
               "nbt_max": "4.24 rps", "nst_max": "4.24 rps"},
    "objective": {"w_pen": 1.0e4, "w_c": 1.0e10},
    "wind": {"enabled": False, "gamma_T": "0 deg", "U_T": "0 m/s"},
    "optimizer": {"initial_population": 20, "max_population": 240, "max_evaluations": 300000, "seed": 0},
}

APPROX = "Obstacle polygons are schematic approximations of the port layout, not survey data."


def state(x0, u, y0, vm, psi, r):
    return {"x0": f"{x0} m", "u": f"{u} kn", "y0": f"{y0} m", "vm": f"{vm} m/s", "psi": f"{psi} deg",
            "r": f"{r} deg/s"}


def scenarios():
    nanko = nanko_obstacles()
    ariake = ariake_obstacles()
    berth_tol = {"x0": "1 m", "u": "0.1 m/s", "y0": "1 m", "vm": "0.1 m/s", "psi": "1 deg", "r": "0.0764 deg/s"}
    unberth_tol = {"x0": "1 m", "u": "0.1 m/s", "y0": "1 m", "vm": "0 m/s", "psi": "1 deg", "r": "0.764 deg/s"}
    out = {}
    out["nanko_berth"] = {
        "name": "nanko_berth", "mode": "berthing",
        "notes": [APPROX, "Starboard side to, head out. Origin at the berthing point."],
        "initial_state": state(-598.7, 8.0, -1845.2, 0.0, 132, 0.0),
        "desired_state": state(0.0, 0.0, 0.0, 0.0, 227, 0.0),
        "tolerance": berth_tol,
        "domain": {"W": "3.08 Lpp", "U_min": "1 kn", "U_max": "6 kn", "n_vertices": 13},
        "obstacles": nanko,
    }
    out["nanko_unberth"] = {
        "name": "nanko_unberth", "mode": "unberthing",
        "notes": [APPROX, "Desired exit heading 312 deg is kept as tabulated (not the reverse of the 132 deg "
                          "approach)."],
        "initial_state": state(0.0, 0.0, 0.0, 0.0, 227, 0.0),
        "desired_state": state(-598.7, 6.0, -1845.2, 0.0, 312, 0.0),
        "tolerance": unberth_tol,
        "domain": {"W": "3.08 Lpp", "U_min": "1 kn", "U_max": "6 kn", "n_vertices": 13},
        "obstacles": nanko,
    }
    out["nanko_waypoint"] = {
        "name": "nanko_waypoint", "mode": "berthing",
        "notes": [APPROX, "Start in the outer passage; the regular berthing start point is a waypoint."],
        "initial_state": state(-753.7, 8.0, -2892.1, 0.0, 45, 0.0),
        "desired_state": state(0.0, 0.0, 0.0, 0.0, 227, 0.0),
        "tolerance": berth_tol,
        "domain": {"W": "3.08 Lpp", "U_min": "1 kn", "U_max": "6 kn", "n_vertices": 13},
        "obstacles": nanko,
        "waypoints": [{"x0": "-598.7 m", "y0": "-1845.2 m", "L_tol": "0.5 Lpp"}],
    }
    out["ariake_berth"] = {
        "name": "ariake_berth", "mode": "berthing",
        "notes": [APPROX, "Port side to, head out. Origin at the berthing point."],
        "initial_state": state(-891.3, 8.0, 3317.5, 0.0, 326, 0.0),
        "desired_state": state(0.0, 0.0, 0.0, 0.0, 146, 0.0),
        "tolerance": berth_tol,
        "domain": {"W": "2.40 Lpp", "U_min": "1 kn", "U_max": "6 kn", "n_vertices": 13},
        "obstacles": ariake,
    }
    out["ariake_unberth"] = {
        "name": "ariake_unberth", "mode": "unberthing",
        "notes": [APPROX, "Desired y0 = -3317.5 m is kept as tabulated although the berthing start point "
                          "has y0 = +3317.5 m; the sign looks inconsistent."],
        "initial_state": state(0.0, 0.0, 0.0, 0.0, 146, 0.0),
        "desired_state": state(-891.3, 6.0, -3317.5, 0.0, 146, 0.0),
        "tolerance": unberth_tol,
        "domain": {"W": "2.40 Lpp", "U_min": "1 kn", "U_max": "6 kn", "n_vertices": 13},
        "obstacles": ariake,
    }
    out["straight_berth"] = {
        "name": "straight_berth", "mode": "berthing",
        "notes": ["Single straight quay wall along x0, berth 40 m off the wall, starboard side to.",
                  "Final side-step: the ship lies stopped 20 m off the berth line and must close it with",
                  "thrusters and propeller, arriving stopped and square to the wall.",
                  "w_U is set explicitly because the start speed is zero (0.5 kn = half of a 1 kn approach)."],
        "initial_state": state(0.0, 0.0, -20.0, 0.0, 0, 0.0),
        "desired_state": state(0.0, 0.0, 0.0, 0.0, 0, 0.0),
        "tolerance": berth_tol,
        "objective": {"w_pen": 1.0e4, "w_c": 1.0e10, "w_U": "0.5 kn"},
        "domain": {"W": "3.08 Lpp", "U_min": "1 kn", "U_max": "6 kn", "n_vertices": 13},
        "obstacles": [{"name": "quay_wall", "vertices": [[-2000, 40], [1000, 40], [1000, 400], [-2000, 400]]}],
        "control": {"m": 10, "t_c": "90 s", "dt": "1 s"},
        "bounds": {"t_f_min": "150 s", "t_f_max": "900 s", "delta_max": "35 deg", "np_max": "2.08 rps",
                   "nbt_max": "4.24 rps", "nst_max": "4.24 rps"},
        "optimizer": {"initial_population": 20, "max_population": 240, "max_evaluations": 20000, "seed": 0},
    }
    for name, sc in out.items():
        merged = json.loads(json.dumps(COMMON))
        merged.update(sc)
        out[name] = merged
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, sc in scenarios().items():
        (OUT / f"{name}.json").write_text(json.dumps(sc, indent=1) + "\n")
        print("wrote", OUT / f"{name}.json")


if __name__ == "__main__":
    main()
