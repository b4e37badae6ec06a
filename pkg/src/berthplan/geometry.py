"""Polygon primitives, the speed-scaled elliptical ship domain and the penetration penalty.

Points are ``(x0, y0)`` pairs in the world frame (x0 north, y0 east). The
ship frame has x towards the bow and y to starboard; domain angles are measured
clockwise from the bow, which with this handedness is the ordinary
counter-clockwise angle of the (x, y) ship-frame coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._accel import jit
from .core import ConfigurationError, ShipParameters, ShipState, knots_to_mps


class InvalidPolygon(ConfigurationError):
    pass


# --------------------------------------------------------------------------
# kernels


@jit
def point_in_polygon_xy(px, py, xs, ys):
    """Crossing-number containment; points on an edge or vertex count as inside."""
    n = xs.shape[0]
    inside = False
    j = n - 1
    for i in range(n):
        xi = xs[i]
        yi = ys[i]
        xj = xs[j]
        yj = ys[j]
        cross = (xj - xi) * (py - yi) - (yj - yi) * (px - xi)
        if cross == 0.0:
            if min(xi, xj) <= px <= max(xi, xj) and min(yi, yj) <= py <= max(yi, yj):
                return True
        if (yi > py) != (yj > py):
            x_cross = xi + (py - yi) * (xj - xi) / (yj - yi)
            if px < x_cross:
                inside = not inside
        j = i
    return inside


@jit
def segment_distance(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    t = 0.0
    if l2 > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return math.sqrt(ex * ex + ey * ey)


@jit
def boundary_distance_xy(px, py, xs, ys):
    n = xs.shape[0]
    best = np.inf
    j = n - 1
    for i in range(n):
        d = segment_distance(px, py, xs[j], ys[j], xs[i], ys[i])
        if d < best:
            best = d
        j = i
    return best


@jit
def penetration_xy(px, py, xs, ys):
    if not point_in_polygon_xy(px, py, xs, ys):
        return 0.0
    return boundary_distance_xy(px, py, xs, ys)


@jit
def penetration_sum_packed(vx, vy, xs, ys, offsets, bbox):
    """Sum of penetration lengths of every vertex (vx[j], vy[j]) into every polygon.

    Polygons are packed: polygon k owns xs[offsets[k]:offsets[k+1]] and has
    bounding box bbox[k] = (xmin, xmax, ymin, ymax).
    """
    total = 0.0
    n_poly = offsets.shape[0] - 1
    for j in range(vx.shape[0]):
        px = vx[j]
        py = vy[j]
        for k in range(n_poly):
            if px < bbox[k, 0] or px > bbox[k, 1] or py < bbox[k, 2] or py > bbox[k, 3]:
                continue
            a = offsets[k]
            b = offsets[k + 1]
            total += penetration_xy(px, py, xs[a:b], ys[a:b])
    return total


# domain configuration packed as a float array for the kernels
DOM_LX_MIN = 0
DOM_LXL_MAX = 1
DOM_LXS_MAX = 2
DOM_LY_MIN = 3
DOM_LY_MAX = 4
DOM_U_MIN = 5
DOM_U_MAX = 6
DOM_HALF_L = 7
DOM_HALF_B = 8
DOM_SIZE = 9


@jit
def _ramp(lo, hi, U, u_min, u_max):
    if U <= u_min:
        return lo
    if U >= u_max:
        return hi
    return lo + (hi - lo) * (U - u_min) / (u_max - u_min)


@jit
def margins_kernel(U, sign_u, dom):
    long_m = _ramp(dom[DOM_LX_MIN], dom[DOM_LXL_MAX], U, dom[DOM_U_MIN], dom[DOM_U_MAX])
    short_m = _ramp(dom[DOM_LX_MIN], dom[DOM_LXS_MAX], U, dom[DOM_U_MIN], dom[DOM_U_MAX])
    side_m = _ramp(dom[DOM_LY_MIN], dom[DOM_LY_MAX], U, dom[DOM_U_MIN], dom[DOM_U_MAX])
    if sign_u >= 0.0:
        return long_m, short_m, side_m
    return short_m, long_m, side_m


@jit
def domain_vertices_kernel(x0, y0, psi, u, vm, dom, cos_a, sin_a, out_x, out_y):
    U = math.sqrt(u * u + vm * vm)
    fore, aft, side = margins_kernel(U, u, dom)
    a_fore = fore + dom[DOM_HALF_L]
    a_aft = aft + dom[DOM_HALF_L]
    b = side + dom[DOM_HALF_B]
    cp = math.cos(psi)
    sp = math.sin(psi)
    for i in range(cos_a.shape[0]):
        c = cos_a[i]
        if c > 0.0:
            px = a_fore * c
        else:
            px = a_aft * c
        py = b * sin_a[i]
        out_x[i] = x0 + px * cp - py * sp
        out_y[i] = y0 + px * sp + py * cp


@jit
def instantaneous_penalty_kernel(x0, y0, psi, u, vm, dom, cos_a, sin_a, xs, ys, offsets, bbox,
                                 work_x, work_y):
    if offsets.shape[0] < 2:
        return 0.0
    domain_vertices_kernel(x0, y0, psi, u, vm, dom, cos_a, sin_a, work_x, work_y)
    return penetration_sum_packed(work_x, work_y, xs, ys, offsets, bbox)


# --------------------------------------------------------------------------
# polygon types


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(p1, p2, q1):
        return True
    if o2 == 0 and on_seg(p1, p2, q2):
        return True
    if o3 == 0 and on_seg(q1, q2, p1):
        return True
    if o4 == 0 and on_seg(q1, q2, p2):
        return True
    return False


def polygon_problems(vertices: Sequence[Sequence[float]]) -> list[str]:
    """Reasons why ``vertices`` is not a valid simple polygon (empty when valid)."""
    pts = [tuple(map(float, p)) for p in vertices]
    if len(pts) < 3:
        return [f"needs at least 3 vertices, has {len(pts)}"]
    if any(len(p) != 2 or not all(math.isfinite(c) for c in p) for p in pts):
        return ["vertices must be finite (x0, y0) pairs"]
    problems = []
    n = len(pts)
    area2 = sum(pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1] for i in range(n))
    if area2 == 0:
        problems.append("has zero area")
    if len(set(pts)) != n:
        problems.append("has repeated vertices")
        return problems
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            b1, b2 = pts[j], pts[(j + 1) % n]
            if _segments_intersect(a1, a2, b1, b2):
                problems.append(f"edges {i} and {j} intersect (polygon is not simple)")
                return problems
    return problems


@dataclass(frozen=True)
class Polygon:
    vertices: tuple
    name: str = ""

    def __post_init__(self):
        verts = tuple((float(p[0]), float(p[1])) for p in self.vertices)
        object.__setattr__(self, "vertices", verts)
        problems = polygon_problems(verts)
        if problems:
            raise InvalidPolygon(f"polygon {self.name or ''}: " + "; ".join(problems))

    @cached_property
    def xy(self) -> np.ndarray:
        a = np.array(self.vertices, dtype=float)
        a.flags.writeable = False
        return a

    @property
    def area(self) -> float:
        x, y = self.xy[:, 0], self.xy[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))

    def contains(self, p) -> bool:
        return bool(point_in_polygon_xy(float(p[0]), float(p[1]), self.xy[:, 0].copy(), self.xy[:, 1].copy()))


@dataclass(frozen=True)
class ObstacleSet:
    obstacles: tuple = ()

    def __post_init__(self):
        obs = tuple(o if isinstance(o, Polygon) else Polygon(o) for o in self.obstacles)
        object.__setattr__(self, "obstacles", obs)

    def __len__(self):
        return len(self.obstacles)

    def __iter__(self):
        return iter(self.obstacles)

    @cached_property
    def packed(self):
        """(xs, ys, offsets, bbox) arrays for the penalty kernels."""
        if not self.obstacles:
            return (np.zeros(0), np.zeros(0), np.zeros(1, dtype=np.int64), np.zeros((0, 4)))
        xy = np.concatenate([p.xy for p in self.obstacles])
        counts = [len(p.vertices) for p in self.obstacles]
        offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        bbox = np.array([[p.xy[:, 0].min(), p.xy[:, 0].max(), p.xy[:, 1].min(), p.xy[:, 1].max()]
                         for p in self.obstacles])
        return (np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]), offsets, bbox)


def _as_polygon(poly) -> Polygon:
    return poly if isinstance(poly, Polygon) else Polygon(tuple(poly))


def point_in_polygon(p, poly) -> bool:
    """True if ``p`` is inside ``poly`` or on its boundary."""
    return _as_polygon(poly).contains(p)


def penetration_length(p, poly) -> float:
    """Distance from ``p`` to the nearest edge of ``poly`` when inside, else 0."""
    poly = _as_polygon(poly)
    return float(penetration_xy(float(p[0]), float(p[1]), poly.xy[:, 0].copy(), poly.xy[:, 1].copy()))


# --------------------------------------------------------------------------
# ship domain


@dataclass(frozen=True)
class DomainConfig:
    """Domain sizing for a port with minimum passage width ``W``.

    Maximum margins follow from a 3:2:1 bow:stern:side extent at 0.25 W side
    clearance; minimum margins are front-back symmetric.
    """

    W: float
    Lpp: float = 150.0
    B: float = 24.46
    U_min: float = knots_to_mps(1.0)
    U_max: float = knots_to_mps(6.0)
    n_vertices: int = 13

    def __post_init__(self):
        for name in ("W", "Lpp", "B", "U_min", "U_max"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ConfigurationError(f"domain.{name} must be finite")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "n_vertices", int(self.n_vertices))
        problems = self.problems()
        if problems:
            raise ConfigurationError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not (self.U_min >= 0 and self.U_min < self.U_max):
            out.append("domain: require 0 <= U_min < U_max")
        if self.n_vertices < 8:
            out.append("domain.n_vertices: at least 8 vertices are required")
        if not self.L_x_max_L > self.L_x_min:
            out.append(f"domain.W: long margin {self.L_x_max_L:.2f} m must exceed the minimum "
                       f"{self.L_x_min:.2f} m (needs W > 4/3 Lpp = {4 * self.Lpp / 3:.2f} m)")
        if not self.L_y_max > self.L_y_min:
            out.append(f"domain.W: side margin {self.L_y_max:.2f} m must exceed B = {self.L_y_min:.2f} m")
        return out

    @classmethod
    def for_ship(cls, W: float, ship: ShipParameters, **kw) -> "DomainConfig":
        return cls(W=W, Lpp=ship.Lpp, B=ship.B, **kw)

    @property
    def L_x_max_L(self) -> float:
        return 0.75 * self.W - 0.5 * self.Lpp

    @property
    def L_x_max_S(self) -> float:
        return 0.5 * self.W - 0.5 * self.Lpp

    @property
    def L_y_max(self) -> float:
        return 0.25 * self.W - 0.5 * self.B

    @property
    def L_x_min(self) -> float:
        return 0.25 * self.Lpp

    @property
    def L_y_min(self) -> float:
        return self.B

    @cached_property
    def packed(self) -> np.ndarray:
        dom = np.zeros(DOM_SIZE)
        dom[DOM_LX_MIN] = self.L_x_min
        dom[DOM_LXL_MAX] = self.L_x_max_L
        dom[DOM_LXS_MAX] = self.L_x_max_S
        dom[DOM_LY_MIN] = self.L_y_min
        dom[DOM_LY_MAX] = self.L_y_max
        dom[DOM_U_MIN] = self.U_min
        dom[DOM_U_MAX] = self.U_max
        dom[DOM_HALF_L] = 0.5 * self.Lpp
        dom[DOM_HALF_B] = 0.5 * self.B
        dom.flags.writeable = False
        return dom

    @cached_property
    def angles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vertex angles starting at the bow, and their cosines and sines."""
        alpha = 2.0 * math.pi * np.arange(self.n_vertices) / self.n_vertices
        c, s = np.cos(alpha), np.sin(alpha)
        for a in (alpha, c, s):
            a.flags.writeable = False
        return alpha, c, s


@dataclass(frozen=True, eq=False)
class ShipDomain:
    boundary_vertices: np.ndarray  # (n, 2) world-frame points

    def __len__(self):
        return self.boundary_vertices.shape[0]


def domain_margins(U: float, sign_u: float, cfg: DomainConfig) -> tuple[float, float, float]:
    """(fore, aft, side) margins beyond the hull for resultant speed ``U``."""
    if U < 0:
        raise ValueError("speed must be non-negative")
    fore, aft, side = margins_kernel(float(U), float(sign_u), cfg.packed)
    return float(fore), float(aft), float(side)


def domain_vertices(state: ShipState, cfg: DomainConfig, params: ShipParameters | None = None) -> ShipDomain:
    if params is not None and (params.Lpp != cfg.Lpp or params.B != cfg.B):
        cfg = DomainConfig(W=cfg.W, Lpp=params.Lpp, B=params.B, U_min=cfg.U_min, U_max=cfg.U_max,
                           n_vertices=cfg.n_vertices)
    _, c, s = cfg.angles
    ox = np.empty(cfg.n_vertices)
    oy = np.empty(cfg.n_vertices)
    domain_vertices_kernel(state.x0, state.y0, state.psi, state.u, state.vm, cfg.packed, c, s, ox, oy)
    return ShipDomain(np.column_stack([ox, oy]))


def penalty_for_points(points, obstacles: ObstacleSet) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    xs, ys, off, bbox = obstacles.packed
    return float(penetration_sum_packed(np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
                                        xs, ys, off, bbox))


def instantaneous_penalty(state: ShipState, obstacles: ObstacleSet | Iterable, cfg: DomainConfig,
                          params: ShipParameters | None = None) -> float:
    """Sum over obstacles and domain vertices of the vertex penetration length (m)."""
    if not isinstance(obstacles, ObstacleSet):
        obstacles = ObstacleSet(tuple(obstacles))
    dom = domain_vertices(state, cfg, params)
    return penalty_for_points(dom.boundary_vertices, obstacles)
