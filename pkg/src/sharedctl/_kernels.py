"""Compiled kernels for the per-tick path scans.

These loops run at 1 kHz over a couple thousand path samples; numba gets
them to a few microseconds where numpy call overhead alone costs tens.
All kernels are pure functions of their arguments.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def scan_path(arr, seg_vec, seg_len2, closed, x0, x1, x2, d2_out, eps_len, s_prev):
    """Squared sample distances, exact segment projection and tie census.

    Fills d2_out with per-sample squared distances. Returns
    (best_seg, best_t, d_min, tie_count, tie_pick) where tie_pick is the
    tied sample index closest ahead of s_prev (-1 when unused).
    """
    n = arr.shape[0]
    m = n if closed else n - 1

    best_sample_d2 = 1e300
    for i in range(n):
        dx = x0 - arr[i, 0]
        dy = x1 - arr[i, 1]
        dz = x2 - arr[i, 2]
        v = dx * dx + dy * dy + dz * dz
        d2_out[i] = v
        if v < best_sample_d2:
            best_sample_d2 = v

    best_seg = 0
    best_t = 0.0
    best_d2 = 1e300
    for i in range(m):
        vx = seg_vec[i, 0]
        vy = seg_vec[i, 1]
        vz = seg_vec[i, 2]
        t = ((x0 - arr[i, 0]) * vx + (x1 - arr[i, 1]) * vy + (x2 - arr[i, 2]) * vz) / seg_len2[i]
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        px = arr[i, 0] + vx * t - x0
        py = arr[i, 1] + vy * t - x1
        pz = arr[i, 2] + vz * t - x2
        pd2 = px * px + py * py + pz * pz
        if pd2 < best_d2:
            best_d2 = pd2
            best_seg = i
            best_t = t

    d_min = math.sqrt(best_d2)
    # tie census runs at sample granularity against the best sample, not
    # the projected minimum (mid-segment points sit a sagitta closer)
    bound = (math.sqrt(best_sample_d2) + eps_len) ** 2
    ties = 0
    tie_pick = -1
    best_ahead = 1e300
    min_ahead = 0.75 / m  # anything closer does not count as progress
    for i in range(n):
        if d2_out[i] <= bound:
            ties += 1
            s_i = i / m
            if closed:
                ahead = (s_i - s_prev) % 1.0
            else:
                ahead = s_i - s_prev if s_i >= s_prev else 1e300
            if ahead < min_ahead:
                ahead = 1.0 + ahead
            if ahead < best_ahead:
                best_ahead = ahead
                tie_pick = i

    return best_seg, best_t, d_min, ties, tie_pick


@njit(cache=True)
def first_outside(d2, i0, window, rho2, closed):
    """First forward step k in [1, window] whose sample leaves the sphere."""
    n = d2.shape[0]
    for k in range(1, window + 1):
        idx = (i0 + k) % n if closed else i0 + k
        if d2[idx] >= rho2:
            return k
    return -1


@njit(cache=True)
def argmin_ring_error(d2, i0, window, rho, closed):
    """Forward step k in [1, window] minimizing |dist - rho|."""
    n = d2.shape[0]
    best_k = 1
    best = 1e300
    for k in range(1, window + 1):
        idx = (i0 + k) % n if closed else i0 + k
        err = abs(math.sqrt(d2[idx]) - rho)
        if err < best:
            best = err
            best_k = k
    return best_k


@njit(cache=True)
def refine_crossing(arr, seg_i, n, lo, x0, x1, x2, rho, tol_m):
    """Bisect dist(x, segment(u)) = rho on [lo, 1] of segment seg_i."""
    j = (seg_i + 1) % n
    ax = arr[seg_i, 0]
    ay = arr[seg_i, 1]
    az = arr[seg_i, 2]
    bx = arr[j, 0] - ax
    by = arr[j, 1] - ay
    bz = arr[j, 2] - az
    seg_len = math.sqrt(bx * bx + by * by + bz * bz)

    dx = ax + bx * lo - x0
    dy = ay + by * lo - x1
    dz = az + bz * lo - x2
    g_lo = math.sqrt(dx * dx + dy * dy + dz * dz) - rho
    hi = 1.0
    while (hi - lo) * seg_len > tol_m:
        mid = 0.5 * (lo + hi)
        dx = ax + bx * mid - x0
        dy = ay + by * mid - x1
        dz = az + bz * mid - x2
        g_mid = math.sqrt(dx * dx + dy * dy + dz * dz) - rho
        if (g_mid < 0.0) == (g_lo < 0.0):
            lo = mid
            g_lo = g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def nearest_sample(arr, x0, x1, x2):
    """Index and squared distance of the nearest sample point."""
    n = arr.shape[0]
    best_i = 0
    best = 1e300
    for i in range(n):
        dx = x0 - arr[i, 0]
        dy = x1 - arr[i, 1]
        dz = x2 - arr[i, 2]
        v = dx * dx + dy * dy + dz * dz
        if v < best:
            best = v
            best_i = i
    return best_i, best


def warm_up() -> None:
    """Trigger compilation (or disk-cache load) of every kernel."""
    arr = np.zeros((8, 3))
    arr[:, 0] = np.arange(8.0)
    seg_vec = np.diff(arr, axis=0)
    seg_len2 = np.einsum("ij,ij->i", seg_vec, seg_vec)
    d2 = np.empty(8)
    scan_path(arr, seg_vec, seg_len2, False, 0.5, 0.1, 0.0, d2, 1e-9, 0.0)
    first_outside(d2, 0, 7, 4.0, False)
    argmin_ring_error(d2, 0, 7, 2.0, False)
    refine_crossing(arr, 0, 8, 0.0, 0.5, 0.1, 0.0, 1.0, 1e-7)
    nearest_sample(arr, 0.5, 0.1, 0.0)
