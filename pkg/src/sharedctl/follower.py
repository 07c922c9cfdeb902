"""Reactive goal selection on the reference path.

A virtual sphere of dynamic radius rho is centered on the end effector;
the forward intersection of the sphere with the path is the next goal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import PathSpec, path_point
from .params import ControllerParams
from .vec import EPS_LEN, Vec3

# Bisection stop width for the crossing refinement, in meters of arc.
_REFINE_TOL_M = 1e-7

# Closed-path forward search is capped at half a period so the goal stays
# local instead of jumping to the antipodal re-entry of the sphere.
_WINDOW_FRACTION = 0.5


@dataclass
class FollowerState:
    """Owned by one session; supports progress tie-breaking and lap count."""

    s_prev: float = 0.0
    s_near_prev: float = 0.0
    loops_completed: int = 0
    # a lap only counts after passing mid-path, so jitter across s=0
    # cannot double-count
    lap_armed: bool = False


class _PathScratch:
    """Static per-path arrays shared by every query against one PathSpec."""

    def __init__(self, path: PathSpec):
        arr = path.as_array()
        self.arr = arr
        if path.closed:
            seg_vec = np.roll(arr, -1, axis=0) - arr
        else:
            seg_vec = arr[1:] - arr[:-1]
        self.seg_vec = np.ascontiguousarray(seg_vec)
        self.seg_len2 = np.einsum("ij,ij->i", seg_vec, seg_vec)
        self.seg_len = np.sqrt(self.seg_len2)


def _scratch(path: PathSpec) -> _PathScratch:
    sc = getattr(path, "_follower_scratch", None)
    if sc is None:
        sc = _PathScratch(path)
        object.__setattr__(path, "_follower_scratch", sc)
    return sc


def sphere_radius(d: float, params: ControllerParams) -> float:
    """Lookahead radius: lam*d clamped from below at rho_min."""
    if d >= params.rho_min:
        return params.lam * d
    return params.rho_min


def _scan(path: PathSpec, x: Vec3, s_prev: float):
    sc = _scratch(path)
    d2 = np.empty(path.n_samples)
    best_seg, best_t, d_min, ties, tie_pick = _kernels.scan_path(
        sc.arr, sc.seg_vec, sc.seg_len2, path.closed,
        x[0], x[1], x[2], d2, EPS_LEN, s_prev,
    )
    s_near = (best_seg + best_t) / path.n_segments
    if s_near >= 1.0:
        s_near = 0.0 if path.closed else 1.0
    return s_near, d_min, d2, ties, tie_pick


def nearest_param(path: PathSpec, x: Vec3) -> tuple[float, float]:
    """Parameter of the closest path point and its distance.

    Exact over the polyline: x is projected onto every segment and the
    best projection wins.
    """
    s_near, d, _, _, _ = _scan(path, x, 0.0)
    return s_near, d


def nearest_sample_param(path: PathSpec, x: Vec3) -> tuple[float, float]:
    """Coarse variant: nearest sample only, no segment refinement.

    Half a segment of slack, which is plenty for perception-style callers
    like the synthetic operator.
    """
    i, d2 = _kernels.nearest_sample(path.as_array(), x[0], x[1], x[2])
    return i / path.n_segments, math.sqrt(d2)


def _seg_endpoints(path: PathSpec, i: int) -> tuple[Vec3, Vec3]:
    return path.samples[i], path.samples[(i + 1) % path.n_samples]


def _seg_dist(a: Vec3, b: Vec3, u: float, x: Vec3) -> float:
    dx = a[0] + (b[0] - a[0]) * u - x[0]
    dy = a[1] + (b[1] - a[1]) * u - x[1]
    dz = a[2] + (b[2] - a[2]) * u - x[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def _refine_closest_approach(path: PathSpec, x: Vec3, seg_i: int, rho: float,
                             lo: float = 0.0) -> float:
    """Ternary search of |dist - rho| over one segment, returns fraction."""
    a, b = _seg_endpoints(path, seg_i)
    hi = 1.0
    for _ in range(40):
        u1 = lo + (hi - lo) / 3.0
        u2 = hi - (hi - lo) / 3.0
        if abs(_seg_dist(a, b, u1, x) - rho) < abs(_seg_dist(a, b, u2, x) - rho):
            hi = u2
        else:
            lo = u1
    return 0.5 * (lo + hi)


def select_goal(
    path: PathSpec,
    x: Vec3,
    state: FollowerState,
    params: ControllerParams,
) -> tuple[Vec3, float, bool]:
    """Pick the goal point ahead of the end effector.

    Scans forward from s_near for the first crossing of dist(x, P(s)) = rho
    and refines it by bisection on the crossing segment. When the forward
    window never exits the sphere, the closest approach to its boundary is
    returned and the degraded flag is set. Updates state in place; returns
    (goal point, s_c, degraded).
    """
    m = path.n_segments
    n = path.n_samples
    s_near, d, d2, ties, tie_pick = _scan(path, x, state.s_prev)

    # equidistant tie (e.g. the center of a circular path): prefer the
    # candidate closest ahead of the previous goal so progress continues
    if ties > max(4, n // 64) and tie_pick >= 0:
        s_near = tie_pick / m

    rho = sphere_radius(d, params)

    if not path.closed and s_near >= 1.0 - 1e-12:
        # at the very end of an open path: nothing ahead to aim for
        state.s_near_prev = s_near
        state.s_prev = 1.0
        return path_point(path, 1.0), 1.0, True

    i0 = int(s_near * m)
    u0 = s_near * m - i0
    if i0 >= m:
        i0, u0 = m - 1, 1.0
    window = int(m * _WINDOW_FRACTION) if path.closed else m - i0

    degraded = False
    k = _kernels.first_outside(d2, i0, window, rho * rho, path.closed)

    if k > 0:
        if k == 1:
            seg_i, lo = i0, u0  # crossing within the partial start segment
        else:
            seg_i, lo = (i0 + k - 1) % m if path.closed else i0 + k - 1, 0.0
        u = _kernels.refine_crossing(
            _scratch(path).arr, seg_i, n, lo, x[0], x[1], x[2], rho, _REFINE_TOL_M)
        s_c = (seg_i + u) / m
    else:
        # no sphere exit ahead: take the closest approach to the boundary,
        # refined over the two segments flanking the best sample
        degraded = True
        kk = _kernels.argmin_ring_error(d2, i0, window, rho, path.closed)
        best_sample = (i0 + kk) % n if path.closed else i0 + kk
        s_c, best_err = 0.0, math.inf
        for seg_i in (best_sample - 1, best_sample):
            seg_i = seg_i % m if path.closed else min(max(seg_i, 0), m - 1)
            # never refine back past the start of the forward window
            lo = u0 if seg_i == i0 else 0.0
            u = _refine_closest_approach(path, x, seg_i, rho, lo=lo)
            a, b = _seg_endpoints(path, seg_i)
            err = abs(_seg_dist(a, b, u, x) - rho)
            if err < best_err:
                s_c, best_err = (seg_i + u) / m, err

    if path.closed:
        s_c %= 1.0
        if s_c == s_near:  # refinement collapsed onto the start: nudge forward
            s_c = (s_near + 1.0 / m) % 1.0
    else:
        s_c = min(s_c, 1.0)

    # lap counting: crossing from the last into the first decile, armed at
    # mid path
    if 0.4 <= s_near <= 0.6:
        state.lap_armed = True
    if state.lap_armed and state.s_near_prev >= 0.9 and s_near < 0.1:
        state.loops_completed += 1
        state.lap_armed = False

    state.s_near_prev = s_near
    state.s_prev = s_c
    return path_point(path, s_c), s_c, degraded
