"""Per-tick control law: admittance channel, goal attraction, performance
weighting, blending, output filtering and the two baseline modes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .follower import FollowerState, select_goal
from .geometry import PathSpec, path_point, path_tangent
from .params import ControllerParams, ImpedanceParams, Mode
from .vec import EPS_VEL, ZERO3, Vec3, clamp_norm, norm, scale, sub

# A tick is "active" if a force above threshold arrived within this window.
GATE_WINDOW_S = 0.2


@dataclass
class AdmittanceState:
    """Velocity state of the virtual mass-damper, per axis."""

    v: Vec3 = ZERO3


@dataclass
class FilterState:
    """Previous (pre-saturation) output of the first-order low-pass."""

    y: Vec3 = ZERO3


@dataclass(frozen=True)
class PerformanceBreakdown:
    alpha1: float  # angle to the previous executed command, rad
    alpha2: float  # angle to the local path tangent, rad
    eta1: float
    eta2: float
    eta: float


@dataclass(slots=True)
class ControlFrame:
    """Everything one controller tick produced."""

    t: float
    x: Vec3
    f: Vec3
    v_h: Vec3
    v_r: Vec3
    v_hat_s: Vec3
    v_s: Vec3
    eta_h: float
    eta_r: float
    eta_s: float
    eta_factors: tuple[tuple[float, float], ...]  # (eta1, eta2) for h, r, s
    alphas: tuple[tuple[float, float], ...]  # (alpha1, alpha2) for h, r, s
    goal: Vec3
    s_near: float
    s_c: float
    mode: Mode
    degraded: bool


@dataclass
class LoopState:
    """Mutable controller state owned by one session."""

    admittance: AdmittanceState = field(default_factory=AdmittanceState)
    filt: FilterState = field(default_factory=FilterState)
    follower: FollowerState = field(default_factory=FollowerState)
    prev_executed: Vec3 | None = None  # None until the first tick
    last_active_t: float = -math.inf


def admittance_step(
    state: AdmittanceState, f: Vec3, params: ControllerParams
) -> tuple[AdmittanceState, Vec3]:
    """Backward-Euler step of M*dv/dt + B*v = f, per axis."""
    dt = params.dt
    v = state.v
    v_next = (
        (params.M[0] * v[0] + f[0] * dt) / (params.M[0] + params.B[0] * dt),
        (params.M[1] * v[1] + f[1] * dt) / (params.M[1] + params.B[1] * dt),
        (params.M[2] * v[2] + f[2] * dt) / (params.M[2] + params.B[2] * dt),
    )
    return AdmittanceState(v_next), v_next


def robot_command(x: Vec3, x_d: Vec3, params: ControllerParams) -> Vec3:
    """Proportional attraction toward the goal point."""
    return (
        params.K_a[0] * (x_d[0] - x[0]),
        params.K_a[1] * (x_d[1] - x[1]),
        params.K_a[2] * (x_d[2] - x[2]),
    )


def performance(
    cmd: Vec3, prev_executed: Vec3, tangent: Vec3, params: ControllerParams
) -> PerformanceBreakdown:
    """Smoothness/directness score of a command, in [0, 1].

    Vanishing commands (norm < EPS_VEL) are direction-free: both angles are
    defined as 0, so a command that contributes nothing to the blend scores
    a neutral 1 and the score stays continuous near zero. The same rule
    covers a vanishing previous command at startup (alpha1 = 0).
    """
    n_cmd = norm(cmd)
    if n_cmd < EPS_VEL:
        alpha1 = 0.0
        alpha2 = 0.0
    else:
        n_prev = norm(prev_executed)
        if n_prev < EPS_VEL:
            alpha1 = 0.0
        else:
            c = (prev_executed[0] * cmd[0] + prev_executed[1] * cmd[1]
                 + prev_executed[2] * cmd[2]) / (n_prev * n_cmd)
            alpha1 = math.acos(min(1.0, max(-1.0, c)))
        # tangent is unit norm by contract
        c = (tangent[0] * cmd[0] + tangent[1] * cmd[1] + tangent[2] * cmd[2]) / n_cmd
        alpha2 = math.acos(min(1.0, max(-1.0, c)))
    w1, w2 = params.w
    c1, c2 = params.C
    eta1 = math.exp(-c1 * abs(alpha1))
    eta2 = math.exp(-c2 * abs(alpha2))
    eta = (w1 * eta1 + w2 * eta2) / (w1 + w2)
    return PerformanceBreakdown(alpha1, alpha2, eta1, eta2, eta)


def blend(v_r: Vec3, v_h: Vec3, eta_r: float, eta_h: float) -> Vec3:
    """Raw shared command. The weights are independent, not convex, so the
    sum can exceed either input; saturation downstream bounds it."""
    return (
        eta_r * v_r[0] + eta_h * v_h[0],
        eta_r * v_r[1] + eta_h * v_h[1],
        eta_r * v_r[2] + eta_h * v_h[2],
    )


def finalize(
    v_hat_s: Vec3, eta_s: float, filt: FilterState, params: ControllerParams
) -> tuple[FilterState, Vec3]:
    """Performance-weight, low-pass and saturate the shared command.

    The filter state keeps the pre-saturation output so the filter itself
    stays linear; only the emitted command is clamped to v_max.
    """
    dt = params.dt
    a = dt / (dt + 1.0 / (2.0 * math.pi * params.filter_cutoff))
    y = filt.y
    y_next = (
        y[0] + a * (eta_s * v_hat_s[0] - y[0]),
        y[1] + a * (eta_s * v_hat_s[1] - y[1]),
        y[2] + a * (eta_s * v_hat_s[2] - y[2]),
    )
    return FilterState(y_next), clamp_norm(y_next, params.v_max)


def _gate(ls: LoopState, t: float, f: Vec3, params: ControllerParams) -> bool:
    """True when motion is allowed (recent human input, or gate disabled)."""
    if norm(f) >= params.activity_threshold:
        ls.last_active_t = t
    if not params.gate_enabled:
        return True
    return (t - ls.last_active_t) <= GATE_WINDOW_S


def _apply_lock(v: Vec3, lock_axis: int | None) -> Vec3:
    if lock_axis is None:
        return v
    out = list(v)
    out[lock_axis] = 0.0
    return tuple(out)


def _tick_common(path: PathSpec, x: Vec3, ls: LoopState, params: ControllerParams):
    goal, s_c, degraded = select_goal(path, x, ls.follower, params)
    s_near = ls.follower.s_near_prev
    tangent = path_tangent(path, s_near)
    if ls.prev_executed is None:
        ls.prev_executed = tangent
    return goal, s_c, degraded, s_near, tangent


def shared_tick(
    t: float,
    x: Vec3,
    f: Vec3,
    path: PathSpec,
    ls: LoopState,
    params: ControllerParams,
    lock_axis: int | None = None,
) -> ControlFrame:
    """One tick of the performance-weighted shared controller."""
    ls.admittance, v_h = admittance_step(ls.admittance, f, params)
    goal, s_c, degraded, s_near, tangent = _tick_common(path, x, ls, params)
    v_r = robot_command(x, goal, params)

    perf_h = performance(v_h, ls.prev_executed, tangent, params)
    perf_r = performance(v_r, ls.prev_executed, tangent, params)
    v_hat = blend(v_r, v_h, perf_r.eta, perf_h.eta)
    perf_s = performance(v_hat, ls.prev_executed, tangent, params)

    ls.filt, v_s = finalize(v_hat, perf_s.eta, ls.filt, params)
    if not _gate(ls, t, f, params):
        v_s = ZERO3
    v_s = _apply_lock(v_s, lock_axis)
    ls.prev_executed = v_s

    return ControlFrame(
        t, x, f, v_h, v_r, v_hat, v_s,
        perf_h.eta, perf_r.eta, perf_s.eta,
        ((perf_h.eta1, perf_h.eta2), (perf_r.eta1, perf_r.eta2), (perf_s.eta1, perf_s.eta2)),
        ((perf_h.alpha1, perf_h.alpha2), (perf_r.alpha1, perf_r.alpha2), (perf_s.alpha1, perf_s.alpha2)),
        goal, s_near, s_c, Mode.SHARED, degraded,
    )


def standalone_tick(
    t: float,
    x: Vec3,
    f: Vec3,
    path: PathSpec,
    ls: LoopState,
    params: ControllerParams,
    lock_axis: int | None = None,
) -> ControlFrame:
    """No assistance: the human command goes straight through the output
    stage (filter, saturation, gate). Robot command and performance are
    still computed for the telemetry."""
    ls.admittance, v_h = admittance_step(ls.admittance, f, params)
    goal, s_c, degraded, s_near, tangent = _tick_common(path, x, ls, params)
    v_r = robot_command(x, goal, params)

    perf_h = performance(v_h, ls.prev_executed, tangent, params)
    perf_r = performance(v_r, ls.prev_executed, tangent, params)
    v_hat = v_h
    perf_s = performance(v_hat, ls.prev_executed, tangent, params)

    ls.filt, v_s = finalize(v_hat, 1.0, ls.filt, params)
    if not _gate(ls, t, f, params):
        v_s = ZERO3
    v_s = _apply_lock(v_s, lock_axis)
    ls.prev_executed = v_s

    return ControlFrame(
        t, x, f, v_h, v_r, v_hat, v_s,
        perf_h.eta, perf_r.eta, perf_s.eta,
        ((perf_h.eta1, perf_h.eta2), (perf_r.eta1, perf_r.eta2), (perf_s.eta1, perf_s.eta2)),
        ((perf_h.alpha1, perf_h.alpha2), (perf_r.alpha1, perf_r.alpha2), (perf_s.alpha1, perf_s.alpha2)),
        goal, s_near, s_c, Mode.STANDALONE, degraded,
    )


def impedance_tick(
    t: float,
    x: Vec3,
    f: Vec3,
    path: PathSpec,
    ls: LoopState,
    params: ControllerParams,
    imp: ImpedanceParams,
    lock_axis: int | None = None,
) -> ControlFrame:
    """Impedance-style baseline: a torque-free band around the path, a
    linear pull back outside it, and a constant tangential feed."""
    ls.admittance, v_h = admittance_step(ls.admittance, f, params)
    goal, s_c, degraded, s_near, tangent = _tick_common(path, x, ls, params)

    nearest = path_point(path, s_near)
    to_path = sub(nearest, x)
    d = norm(to_path)
    if d > imp.deadband and d > EPS_VEL:
        v_corr = scale(to_path, imp.k_n * (d - imp.deadband) / d)
    else:
        v_corr = ZERO3
    v_assist = (
        v_corr[0] + imp.v_tangent * tangent[0],
        v_corr[1] + imp.v_tangent * tangent[1],
        v_corr[2] + imp.v_tangent * tangent[2],
    )
    v_hat = (v_h[0] + v_assist[0], v_h[1] + v_assist[1], v_h[2] + v_assist[2])

    perf_h = performance(v_h, ls.prev_executed, tangent, params)
    perf_r = performance(v_assist, ls.prev_executed, tangent, params)
    perf_s = performance(v_hat, ls.prev_executed, tangent, params)

    ls.filt, v_s = finalize(v_hat, 1.0, ls.filt, params)
    if not _gate(ls, t, f, params):
        v_s = ZERO3
    v_s = _apply_lock(v_s, lock_axis)
    ls.prev_executed = v_s

    return ControlFrame(
        t, x, f, v_h, v_assist, v_hat, v_s,
        perf_h.eta, perf_r.eta, perf_s.eta,
        ((perf_h.eta1, perf_h.eta2), (perf_r.eta1, perf_r.eta2), (perf_s.eta1, perf_s.eta2)),
        ((perf_h.alpha1, perf_h.alpha2), (perf_r.alpha1, perf_r.alpha2), (perf_s.alpha1, perf_s.alpha2)),
        goal, s_near, s_c, Mode.IMPEDANCE, degraded,
    )


def controller_tick(
    mode: Mode,
    t: float,
    x: Vec3,
    f: Vec3,
    path: PathSpec,
    ls: LoopState,
    params: ControllerParams,
    imp: ImpedanceParams | None = None,
    lock_axis: int | None = None,
) -> ControlFrame:
    if mode is Mode.SHARED:
        return shared_tick(t, x, f, path, ls, params, lock_axis)
    if mode is Mode.STANDALONE:
        return standalone_tick(t, x, f, path, ls, params, lock_axis)
    if mode is Mode.IMPEDANCE:
        return impedance_tick(t, x, f, path, ls, params, imp or ImpedanceParams(), lock_axis)
    raise ValueError(f"unknown mode {mode!r}")
