"""3-DOF MMG manoeuvring model with wind and side thrusters, and the RK4 rollout.

Submodels
---------
hull       low-speed capable unified form: linear derivatives scaled by the
           longitudinal speed plus a cross-flow drag integral that is
           evaluated in closed form.
propeller  forward model (n_p >= 0): thrust from a quadratic K_T(J) written
           in expanded form so that n_p -> 0 and u -> 0 stay regular.
           Reverse model (n_p < 0): polynomial thrust and an optional lateral
           force/moment pair (the reversing-propeller side force).
rudder     MMG rudder normal force for u >= 0 and for u < 0 with n_p < 0;
           a third-quadrant model (u < 0, n_p >= 0) where the inflow is the
           propeller race reduced by the astern speed.
wind       apparent-wind loads with ten Fourier-type coefficients.
thrusters  bow/stern thrust with hull-interaction factors, cut off when
           |u| exceeds the threshold speed.

Coefficients are supplied by :class:`~berthplan.core.HydroCoefficients`;
:func:`pack_model` flattens them with the ship particulars into one float
array consumed by the compiled kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import jit
from .core import (GRAVITY, ControlInput, ControlSchedule, HydroCoefficients, ShipParameters, ShipState,
                   WindCondition, wrap_angle)
from .geometry import DomainConfig, ObstacleSet, instantaneous_penalty_kernel

# ---- packed model layout --------------------------------------------------
(RHO, LPP, DRAFT, DP, AR, MASS, XG, MX, MY, IZ_TOT, M11, M22, M23, M33,
 INV22, INV23, INV33,
 R0F, R0A, XVV, XVR, XRR, YV, YR, NV, NR, CD,
 TP, WP0, XP, K0, K1, K2,
 TPR, P0, P1, P2, PY0, PY1, PN0, PN1,
 TR, AH, XH, XR, LR, GAMMA_R, EPS, KAPPA, ETA, FALPHA,
 KAPPA3, C3, GAMMA_R3,
 RHO_A, AT, AL, LOA, WX0, WX1, WX3, WX5, WY1, WY3, WY5, WN1, WN2, WN3,
 DBT, DST, KTBT, KTST, AYSB, AYST, ANSB, ANST, XBT, XST, UTH, SQRT_GL,
 WIND_ON, N_PARAMS) = range(82)

# rows of the per-submodel force table
F_HULL, F_PROP, F_RUDDER, F_WIND, F_THRUST = range(5)
SUBMODELS = ("hull", "propeller", "rudder", "wind", "thruster")


class SimulationError(RuntimeError):
    """The rollout produced a non-finite state."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"non-finite state at t = {t:.3f} s")


def pack_model(params: ShipParameters, coeffs: HydroCoefficients, wind_enabled: bool = True) -> np.ndarray:
    """Flatten particulars and coefficients into the kernel parameter array."""
    coeffs.require("added_mass", "hull", "propeller_forward", "rudder", "thruster")
    P = np.full(N_PARAMS, np.nan)
    L, d, rho = params.Lpp, params.d, params.rho_water
    q2 = 0.5 * rho * L**2 * d
    q4 = 0.5 * rho * L**4 * d
    am = coeffs.group("added_mass")
    P[RHO], P[LPP], P[DRAFT], P[DP], P[AR] = rho, L, d, params.Dp, params.A_R
    P[MASS], P[XG] = params.mass, params.x_G
    P[MX], P[MY] = am["mx_nd"] * q2, am["my_nd"] * q2
    izz = am["Izz_nd"] * q4
    jzz = am["Jzz_nd"] * q4
    m = params.mass
    P[IZ_TOT] = izz + jzz + params.x_G**2 * m
    P[M11] = m + P[MX]
    P[M22] = m + P[MY]
    P[M23] = params.x_G * m
    P[M33] = P[IZ_TOT]
    det = P[M22] * P[M33] - P[M23] ** 2
    if not det > 0 or not P[M11] > 0:
        raise ValueError("singular mass matrix: check added-mass coefficients")
    P[INV22], P[INV23], P[INV33] = P[M33] / det, -P[M23] / det, P[M22] / det

    h = coeffs.group("hull")
    P[R0F], P[R0A] = h["R0_fwd"], h["R0_aft"]
    P[XVV], P[XVR], P[XRR] = h["Xvv"], h["Xvr"], h["Xrr"]
    P[YV], P[YR], P[NV], P[NR], P[CD] = h["Yv"], h["Yr"], h["Nv"], h["Nr"], h["C_D"]

    pf = coeffs.group("propeller_forward")
    P[TP], P[WP0], P[XP] = pf["t_P"], pf["w_P0"], pf["x_P_nd"] * L
    P[K0], P[K1], P[K2] = pf["k0"], pf["k1"], pf["k2"]
    if coeffs.has("propeller_reverse"):
        pr = coeffs.group("propeller_reverse")
        P[TPR], P[P0], P[P1], P[P2] = pr["t_P"], pr["p0"], pr["p1"], pr["p2"]
        P[PY0], P[PY1], P[PN0], P[PN1] = pr["y0"], pr["y1"], pr["n0"], pr["n1"]

    rd = coeffs.group("rudder")
    P[TR], P[AH], P[XH] = rd["t_R"], rd["a_H"], rd["x_H_nd"] * L
    P[XR], P[LR], P[GAMMA_R] = rd["x_R_nd"] * L, rd["l_R_nd"] * L, rd["gamma_R"]
    P[EPS], P[KAPPA], P[ETA], P[FALPHA] = rd["epsilon"], rd["kappa"], rd["eta"], rd["f_alpha"]
    if coeffs.has("rudder_third"):
        r3 = coeffs.group("rudder_third")
        P[KAPPA3], P[C3], P[GAMMA_R3] = r3["kappa3"], r3["c3"], r3["gamma_R3"]

    P[RHO_A], P[AT], P[AL], P[LOA] = params.rho_air, params.A_T, params.A_L, params.L_OA
    if wind_enabled:
        w = coeffs.group("wind")
        (P[WX0], P[WX1], P[WX3], P[WX5], P[WY1], P[WY3], P[WY5],
         P[WN1], P[WN2], P[WN3]) = (w[k] for k in ("X0", "X1", "X3", "X5", "Y1", "Y3", "Y5", "N1", "N2", "N3"))
        P[WIND_ON] = 1.0
    else:
        P[WIND_ON] = 0.0

    t = coeffs.group("thruster")
    P[DBT], P[DST] = params.D_BT, params.D_ST
    P[KTBT], P[KTST] = t["K_TBT"], t["K_TST"]
    P[AYSB], P[AYST], P[ANSB], P[ANST] = t["a_YSB"], t["a_YST"], t["a_NSB"], t["a_NST"]
    P[XBT], P[XST], P[UTH] = params.x_BT, params.x_ST, params.u_threshold
    P[SQRT_GL] = math.sqrt(GRAVITY * L)
    P.flags.writeable = False
    return P


# ---- kernels ---------------------------------------------------------------


@jit
def cross_flow_integrals(v, r, L):
    """I1 = int |v+xr|(v+xr) dx and I2 = int x|v+xr|(v+xr) dx over x in [-L/2, L/2]."""
    half = 0.5 * L
    if abs(r) * half <= abs(v) or abs(r) < 1e-100:
        sgn = 1.0 if v > 0.0 else (-1.0 if v < 0.0 else 0.0)
        return sgn * (v * v * L + r * r * L**3 / 12.0), sgn * (v * r * L**3 / 6.0)
    s1 = v - r * half
    s2 = v + r * half
    c1 = abs(s1) ** 3
    c2 = abs(s2) ** 3
    i1 = (c2 - c1) / (3.0 * r)
    i2 = ((s2 * c2 - s1 * c1) / 4.0 - v * (c2 - c1) / 3.0) / (r * r)
    return i1, i2


@jit
def apparent_wind_kernel(u, vm, psi, gamma_t, u_t):
    cp = math.cos(psi)
    sp = math.sin(psi)
    # true wind velocity (towards which the air moves), world frame
    wx = -u_t * math.cos(gamma_t)
    wy = -u_t * math.sin(gamma_t)
    sx = u * cp - vm * sp
    sy = u * sp + vm * cp
    rx = wx - sx
    ry = wy - sy
    # relative air velocity in the ship frame
    bx = rx * cp + ry * sp
    by = -rx * sp + ry * cp
    ua = math.sqrt(bx * bx + by * by)
    if ua == 0.0:
        return 0.0, 0.0
    return ua, math.atan2(-by, -bx)


@jit
def wind_kernel(ua, gamma_a, P):
    q = 0.5 * P[RHO_A] * ua * ua
    g = 2.0 * math.pi - gamma_a
    cx = P[WX0] + P[WX1] * math.cos(g) + P[WX3] * math.cos(3.0 * g) + P[WX5] * math.cos(5.0 * g)
    cy = P[WY1] * math.sin(g) + P[WY3] * math.sin(3.0 * g) + P[WY5] * math.sin(5.0 * g)
    cn = P[WN1] * math.sin(g) + P[WN2] * math.sin(2.0 * g) + P[WN3] * math.sin(3.0 * g)
    return q * P[AT] * cx, q * P[AL] * cy, q * P[AL] * P[LOA] * cn


@jit
def thruster_kernel(u, nbt, nst, P):
    if abs(u) > P[UTH]:
        return 0.0, 0.0, 0.0
    fr = abs(u) / P[SQRT_GL]
    t_bt = P[RHO] * P[DBT] ** 4 * nbt * abs(nbt) * P[KTBT]
    t_st = P[RHO] * P[DST] ** 4 * nst * abs(nst) * P[KTST]
    y = (1.0 + P[AYSB] * fr) * t_bt + (1.0 + P[AYST] * fr) * t_st
    n = (1.0 + P[ANSB] * fr) * t_bt * P[XBT] + (1.0 + P[ANST] * fr) * t_st * P[XST]
    return 0.0, y, n


@jit
def forces_kernel(state, ctrl, wind, P, out):
    """Fill ``out`` (5 x 3) with (X, Y, N) per submodel; rows follow SUBMODELS."""
    u = state[1]
    v = state[3]
    psi = state[4]
    r = state[5]
    delta = ctrl[0]
    n_p = ctrl[1]
    rho = P[RHO]
    L = P[LPP]
    D = P[DP]

    # hull
    q = 0.5 * rho * L * P[DRAFT]
    r0 = P[R0F] if u >= 0.0 else P[R0A]
    xh = q * (-r0 * u * abs(u) + P[XVV] * v * v + P[XVR] * v * r * L + P[XRR] * r * r * L * L)
    i1, i2 = cross_flow_integrals(v, r, L)
    qc = 0.5 * rho * P[DRAFT] * P[CD]
    yh = q * (P[YV] * v * abs(u) + P[YR] * r * L * u) - qc * i1
    nh = q * L * (P[NV] * v * u + P[NR] * r * L * abs(u)) - qc * i2
    out[F_HULL, 0] = xh
    out[F_HULL, 1] = yh
    out[F_HULL, 2] = nh

    # propeller
    vp = v + P[XP] * r
    beta_p = math.atan2(vp, abs(u))
    wp = P[WP0] * math.exp(-4.0 * beta_p * beta_p)
    ua = u * (1.0 - wp)
    race = 0.0
    if n_p >= 0.0:
        thrust = rho * (P[K0] * n_p * n_p * D**4 + P[K1] * n_p * D**3 * ua + P[K2] * D * D * ua * ua)
        out[F_PROP, 0] = (1.0 - P[TP]) * thrust
        out[F_PROP, 1] = 0.0
        out[F_PROP, 2] = 0.0
        if thrust > 0.0:
            race = 8.0 * thrust / (math.pi * rho * D * D)
    else:
        thrust = rho * (P[P0] * n_p * n_p * D**4 + P[P1] * n_p * D**3 * ua + P[P2] * D * D * ua * ua)
        out[F_PROP, 0] = (1.0 - P[TPR]) * thrust
        out[F_PROP, 1] = rho * (P[PY0] * n_p * n_p * D**4 + P[PY1] * n_p * D**3 * ua)
        out[F_PROP, 2] = rho * L * (P[PN0] * n_p * n_p * D**4 + P[PN1] * n_p * D**3 * ua)

    # rudder
    if u < 0.0 and n_p >= 0.0:
        u_r = P[EPS] * (math.sqrt(P[ETA]) * P[KAPPA3] * math.sqrt(race) + P[C3] * ua)
        v_r = P[GAMMA_R3] * (-v - P[LR] * r)
    else:
        if u >= 0.0:
            a = abs(ua)
            inner = a + P[KAPPA] * (math.sqrt(ua * ua + race) - a)
            u_r = P[EPS] * math.sqrt(P[ETA] * inner * inner + (1.0 - P[ETA]) * ua * ua)
        else:
            u_r = P[EPS] * ua
        v_r = P[GAMMA_R] * (-v - P[LR] * r)
    U_r = math.sqrt(u_r * u_r + v_r * v_r)
    sd = math.sin(delta)
    cd = math.cos(delta)
    f_n = 0.5 * rho * P[AR] * P[FALPHA] * U_r * (u_r * sd - v_r * cd)
    out[F_RUDDER, 0] = -(1.0 - P[TR]) * f_n * sd
    out[F_RUDDER, 1] = -(1.0 + P[AH]) * f_n * cd
    out[F_RUDDER, 2] = -(P[XR] + P[AH] * P[XH]) * f_n * cd

    # wind
    if P[WIND_ON] > 0.0:
        ua_w, ga = apparent_wind_kernel(u, v, psi, wind[0], wind[1])
        xa, ya, na = wind_kernel(ua_w, ga, P)
        out[F_WIND, 0] = xa
        out[F_WIND, 1] = ya
        out[F_WIND, 2] = na
    else:
        out[F_WIND, 0] = 0.0
        out[F_WIND, 1] = 0.0
        out[F_WIND, 2] = 0.0

    xt, yt, nt = thruster_kernel(u, ctrl[2], ctrl[3], P)
    out[F_THRUST, 0] = xt
    out[F_THRUST, 1] = yt
    out[F_THRUST, 2] = nt


@jit
def derivative_kernel(state, ctrl, wind, P, work, out):
    forces_kernel(state, ctrl, wind, P, work)
    fx = 0.0
    fy = 0.0
    fn = 0.0
    for k in range(5):
        fx += work[k, 0]
        fy += work[k, 1]
        fn += work[k, 2]
    u = state[1]
    v = state[3]
    psi = state[4]
    r = state[5]
    m = P[MASS]
    f1 = fx + (m + P[MY]) * v * r + P[XG] * m * r * r
    f2 = fy - (m + P[MX]) * u * r
    f3 = fn - P[XG] * m * u * r
    cp = math.cos(psi)
    sp = math.sin(psi)
    out[0] = u * cp - v * sp
    out[1] = f1 / P[M11]
    out[2] = u * sp + v * cp
    out[3] = P[INV22] * f2 + P[INV23] * f3
    out[4] = r
    out[5] = P[INV23] * f2 + P[INV33] * f3


@jit
def rk4_step(x, ctrl, wind, P, h, work, k1, k2, k3, k4, tmp, out):
    derivative_kernel(x, ctrl, wind, P, work, k1)
    for i in range(6):
        tmp[i] = x[i] + 0.5 * h * k1[i]
    derivative_kernel(tmp, ctrl, wind, P, work, k2)
    for i in range(6):
        tmp[i] = x[i] + 0.5 * h * k2[i]
    derivative_kernel(tmp, ctrl, wind, P, work, k3)
    for i in range(6):
        tmp[i] = x[i] + h * k3[i]
    derivative_kernel(tmp, ctrl, wind, P, work, k4)
    for i in range(6):
        out[i] = x[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0


@jit
def sample_count(t_f, dt):
    n_full = int(math.floor(t_f / dt + 1e-9))
    if t_f - n_full * dt > 1e-9 * dt:
        return n_full + 2
    return n_full + 1


@jit
def rollout_kernel(x_init, controls, t_c, t_f, dt, wind, P, dom, cos_a, sin_a, xs, ys, offsets, bbox,
                   times, states, seg_idx, penalty):
    """Integrate from 0 to t_f; fill per-sample arrays. Returns the failure time or NaN.

    The control segment active at each step is the one containing the step's
    start time, capped at the last segment.
    """
    n = times.shape[0]
    m = controls.shape[0]
    work = np.empty((5, 3))
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    vx = np.empty(cos_a.shape[0])
    vy = np.empty(cos_a.shape[0])
    x = np.empty(6)
    for i in range(6):
        x[i] = x_init[i]
    t = 0.0
    for k in range(n):
        times[k] = t
        for i in range(6):
            states[k, i] = x[i]
        seg = int(math.floor(t / t_c + 1e-12))
        if seg > m - 1:
            seg = m - 1
        if k == n - 1 and k > 0:
            # nothing is integrated from the last sample; report the command that led there
            seg = seg_idx[k - 1]
        seg_idx[k] = seg
        penalty[k] = instantaneous_penalty_kernel(x[0], x[2], x[4], x[1], x[3], dom, cos_a, sin_a,
                                                  xs, ys, offsets, bbox, vx, vy)
        if k == n - 1:
            break
        h = dt
        t_next = (k + 1) * dt
        if t_next > t_f:
            h = t_f - t
            t_next = t_f
        rk4_step(x, controls[seg], wind, P, h, work, k1, k2, k3, k4, tmp, x)
        for i in range(6):
            if not math.isfinite(x[i]):
                return t_next
        t = t_next
    return math.nan


# ---- public API ------------------------------------------------------------


@dataclass(frozen=True)
class ApparentWind:
    U_A: float
    gamma_A: float


@dataclass(frozen=True)
class ForceBreakdown:
    X: float
    Y: float
    N: float
    components: dict = field(default_factory=dict)

    @classmethod
    def from_table(cls, table: np.ndarray, rows) -> "ForceBreakdown":
        comps = {SUBMODELS[k]: (float(table[k, 0]), float(table[k, 1]), float(table[k, 2])) for k in rows}
        X = sum(c[0] for c in comps.values())
        Y = sum(c[1] for c in comps.values())
        N = sum(c[2] for c in comps.values())
        return cls(X, Y, N, comps)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 6) in ShipState order
    controls: np.ndarray  # (n, 4) active command at each sample
    penalty: np.ndarray  # instantaneous collision penalty, m

    def __len__(self):
        return self.times.shape[0]

    @property
    def final_state(self) -> ShipState:
        return ShipState.from_array(self.states[-1])

    def state(self, k: int) -> ShipState:
        return ShipState.from_array(self.states[k])


def _wind_array(wind: WindCondition | None) -> np.ndarray:
    if wind is None:
        return np.zeros(2)
    return np.array([wind.gamma_T, wind.U_T])


def _state_array(state) -> np.ndarray:
    return state.as_array() if isinstance(state, ShipState) else np.asarray(state, dtype=float)


def _ctrl_array(ctrl) -> np.ndarray:
    return ctrl.as_array() if isinstance(ctrl, ControlInput) else np.asarray(ctrl, dtype=float)


def _force_table(state, ctrl, wind, P) -> np.ndarray:
    out = np.zeros((5, 3))
    forces_kernel(_state_array(state), _ctrl_array(ctrl), _wind_array(wind), P, out)
    return out


def apparent_wind(state: ShipState, wind: WindCondition) -> ApparentWind:
    ua, ga = apparent_wind_kernel(state.u, state.vm, state.psi, wind.gamma_T, wind.U_T)
    return ApparentWind(float(ua), wrap_angle(ga))


def wind_force(state: ShipState, wind: WindCondition, params: ShipParameters,
               coeffs: HydroCoefficients) -> ForceBreakdown:
    w = coeffs.group("wind")
    P = np.zeros(N_PARAMS)
    P[RHO_A], P[AT], P[AL], P[LOA] = params.rho_air, params.A_T, params.A_L, params.L_OA
    (P[WX0], P[WX1], P[WX3], P[WX5], P[WY1], P[WY3], P[WY5],
     P[WN1], P[WN2], P[WN3]) = (w[k] for k in ("X0", "X1", "X3", "X5", "Y1", "Y3", "Y5", "N1", "N2", "N3"))
    aw = apparent_wind(state, wind)
    x, y, n = wind_kernel(aw.U_A, aw.gamma_A, P)
    return ForceBreakdown(float(x), float(y), float(n), {"wind": (float(x), float(y), float(n))})


def thruster_force(state: ShipState, ctrl: ControlInput, params: ShipParameters,
                   coeffs: HydroCoefficients) -> ForceBreakdown:
    P = pack_model(params, coeffs, wind_enabled=False)
    x, y, n = thruster_kernel(state.u, ctrl.nbt, ctrl.nst, P)
    return ForceBreakdown(float(x), float(y), float(n), {"thruster": (float(x), float(y), float(n))})


def hull_propeller_rudder_force(state: ShipState, ctrl: ControlInput, params: ShipParameters,
                                coeffs: HydroCoefficients) -> ForceBreakdown:
    """Hull + propeller + rudder loads with quadrant-dependent submodel selection."""
    if ctrl.np < 0:
        coeffs.require("propeller_reverse")
    elif state.u < 0:
        coeffs.require("rudder_third")
    P = pack_model(params, coeffs, wind_enabled=False)
    table = _force_table(state, ctrl, None, P)
    return ForceBreakdown.from_table(table, (F_HULL, F_PROP, F_RUDDER))


def total_force(state: ShipState, ctrl: ControlInput, wind: WindCondition | None, params: ShipParameters,
                coeffs: HydroCoefficients, wind_enabled: bool = True) -> ForceBreakdown:
    P = pack_model(params, coeffs, wind_enabled=wind_enabled and wind is not None)
    table = _force_table(state, ctrl, wind, P)
    return ForceBreakdown.from_table(table, range(5))


def derivative(state: ShipState, ctrl: ControlInput, wind: WindCondition | None, params: ShipParameters,
               coeffs: HydroCoefficients, wind_enabled: bool = True) -> np.ndarray:
    """Time derivative of the state vector, ordered like ShipState."""
    P = pack_model(params, coeffs, wind_enabled=wind_enabled and wind is not None)
    return derivative_packed(_state_array(state), _ctrl_array(ctrl), _wind_array(wind), P)


def derivative_packed(x: np.ndarray, ctrl: np.ndarray, wind: np.ndarray, P: np.ndarray) -> np.ndarray:
    out = np.empty(6)
    derivative_kernel(np.asarray(x, dtype=float), np.asarray(ctrl, dtype=float), wind, P, np.empty((5, 3)), out)
    return out


_NO_OBSTACLES = ObstacleSet(())
_NO_DOMAIN = DomainConfig(W=3.0 * 150.0)


def rollout_packed(x_init: np.ndarray, controls: np.ndarray, t_c: float, t_f: float, dt: float,
                   wind: np.ndarray, P: np.ndarray, domain: DomainConfig, obstacles: ObstacleSet):
    """Low-level rollout returning (times, states, seg_idx, penalty, fail_time)."""
    n = sample_count(t_f, dt)
    times = np.empty(n)
    states = np.empty((n, 6))
    seg_idx = np.empty(n, dtype=np.int64)
    penalty = np.empty(n)
    xs, ys, off, bbox = obstacles.packed
    _, cos_a, sin_a = domain.angles
    fail = rollout_kernel(np.asarray(x_init, dtype=float), np.ascontiguousarray(controls, dtype=float),
                          float(t_c), float(t_f), float(dt), wind, P, domain.packed, cos_a, sin_a,
                          xs, ys, off, bbox, times, states, seg_idx, penalty)
    return times, states, seg_idx, penalty, float(fail)


def simulate(x_init: ShipState, schedule: ControlSchedule, wind: WindCondition | None, params: ShipParameters,
             coeffs: HydroCoefficients, dt: float = 1.0, obstacles: ObstacleSet | None = None,
             domain: DomainConfig | None = None, wind_enabled: bool = True) -> Trajectory:
    """Fixed-step RK4 rollout of ``schedule`` from ``x_init`` up to its terminal time."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    P = pack_model(params, coeffs, wind_enabled=wind_enabled and wind is not None)
    obstacles = obstacles if obstacles is not None else _NO_OBSTACLES
    domain = domain if domain is not None else DomainConfig.for_ship(3.0 * params.Lpp, params)
    times, states, seg, pen, fail = rollout_packed(_state_array(x_init), schedule.segments,
                                                   schedule.segment_duration, schedule.terminal_time, dt,
                                                   _wind_array(wind), P, domain, obstacles)
    if not math.isnan(fail):
        raise SimulationError(fail)
    return Trajectory(times, states, np.asarray(schedule.segments)[seg], pen)
