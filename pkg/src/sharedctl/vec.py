"""3-vector helpers on plain float tuples.

The control loop runs at 1 kHz in pure Python; tuple math is roughly an
order of magnitude cheaper than numpy calls at this size, so everything
tick-rate lives here. Path scans (thousands of points) stay in numpy.
"""

from __future__ import annotations

import math

Vec3 = tuple[float, float, float]

ZERO3: Vec3 = (0.0, 0.0, 0.0)

# Universal "zero length" threshold in meters (and m/s for velocities).
EPS_LEN = 1e-9

# Commands below this norm are treated as direction-free, see control.py.
EPS_VEL = 1e-6


def vec3(x: float, y: float, z: float) -> Vec3:
    """Validating constructor for boundary inputs (config, network)."""
    v = (float(x), float(y), float(z))
    if not (math.isfinite(v[0]) and math.isfinite(v[1]) and math.isfinite(v[2])):
        raise ValueError(f"non-finite vector component: {v!r}")
    return v


def add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(a: Vec3, k: float) -> Vec3:
    return (a[0] * k, a[1] * k, a[2] * k)


def dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def norm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def dist(a: Vec3, b: Vec3) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def normalize(a: Vec3) -> Vec3:
    n = norm(a)
    if n < EPS_LEN:
        raise ValueError("cannot normalize a near-zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


def clamp_norm(a: Vec3, limit: float) -> Vec3:
    """Rescale a onto the ball of radius limit if it falls outside."""
    n = norm(a)
    if n <= limit:
        return a
    k = limit / n
    return (a[0] * k, a[1] * k, a[2] * k)


def angle_between(a: Vec3, b: Vec3) -> float:
    """Unsigned angle in [0, pi]. Caller guarantees both norms > 0."""
    c = dot(a, b) / (norm(a) * norm(b))
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return math.acos(c)


def is_finite(a: Vec3) -> bool:
    return math.isfinite(a[0]) and math.isfinite(a[1]) and math.isfinite(a[2])
