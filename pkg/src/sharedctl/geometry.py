"""Reference paths and the kinematic plant.

Paths are closed or open 3D polylines, uniformly resampled by arc length
and parameterized by s in [0, 1]. Closed paths wrap modulo 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .vec import EPS_LEN, Vec3, vec3

DEFAULT_SAMPLES = 2048


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class PathSpec:
    """Arc-length-uniform polyline path.

    samples: ordered points in meters. For closed paths the segment from
    the last sample back to the first closes the loop (the first sample
    is not repeated).
    """

    samples: tuple[Vec3, ...]
    closed: bool
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.samples)
        if n < 8:
            raise PathError(f"path needs at least 8 samples, got {n}")
        # plain Python floats: the 1 kHz tick math works on these tuples and
        # numpy scalars would slow it several-fold
        object.__setattr__(
            self, "samples",
            tuple(tuple(float(c) for c in p) for p in self.samples),
        )
        arr = np.asarray(self.samples, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise PathError("path contains non-finite samples")
        seg = np.diff(arr, axis=0)
        if self.closed:
            seg = np.vstack([seg, arr[0] - arr[-1]])
        seg_len = np.linalg.norm(seg, axis=1)
        if (seg_len <= EPS_LEN).any():
            raise PathError("consecutive path samples must be distinct")
        if seg_len.max() > 2.0 * seg_len.min():
            raise PathError(
                "path is not approximately arc-length uniform "
                f"(max/min segment {seg_len.max():.3g}/{seg_len.min():.3g})"
            )
        object.__setattr__(self, "_array", arr)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def n_segments(self) -> int:
        return self.n_samples if self.closed else self.n_samples - 1

    @property
    def total_length(self) -> float:
        arr = self._array
        seg = np.diff(arr, axis=0)
        if self.closed:
            seg = np.vstack([seg, arr[0] - arr[-1]])
        return float(np.linalg.norm(seg, axis=1).sum())

    def as_array(self) -> np.ndarray:
        """(n_samples, 3) float64 view of the sample points."""
        return self._array


def _wrap_s(path: PathSpec, s: float) -> float:
    if not math.isfinite(s):
        raise PathError(f"non-finite path parameter {s!r}")
    if path.closed:
        return s % 1.0
    if s < 0.0 or s > 1.0:
        raise PathError(f"parameter {s} outside [0, 1] on an open path")
    return s


def _bracket(path: PathSpec, s: float) -> tuple[int, int, float]:
    """Segment index pair and interpolation fraction for parameter s."""
    m = path.n_segments
    u = _wrap_s(path, s) * m
    i = int(u)
    if i >= m:  # s == 1.0 on an open path
        i = m - 1
        frac = 1.0
    else:
        frac = u - i
    j = (i + 1) % path.n_samples
    return i, j, frac


def path_point(path: PathSpec, s: float) -> Vec3:
    """Linear interpolation of the polyline at parameter s."""
    i, j, frac = _bracket(path, s)
    a = path.samples[i]
    b = path.samples[j]
    return (
        a[0] + (b[0] - a[0]) * frac,
        a[1] + (b[1] - a[1]) * frac,
        a[2] + (b[2] - a[2]) * frac,
    )


def _node_tangents(path: PathSpec) -> np.ndarray:
    arr = path.as_array()
    if path.closed:
        diff = np.roll(arr, -1, axis=0) - np.roll(arr, 1, axis=0)
    else:
        diff = np.empty_like(arr)
        diff[1:-1] = arr[2:] - arr[:-2]
        diff[0] = arr[1] - arr[0]
        diff[-1] = arr[-1] - arr[-2]
    return diff / np.linalg.norm(diff, axis=1, keepdims=True)


def path_tangent(path: PathSpec, s: float) -> Vec3:
    """Unit tangent at s, central differences at nodes blended along segments."""
    tans = getattr(path, "_tangents", None)
    if tans is None:
        tans = _node_tangents(path)
        object.__setattr__(path, "_tangents", tans)
    i, j, frac = _bracket(path, s)
    a = tans[i]
    b = tans[j]
    tx = float(a[0]) * (1.0 - frac) + float(b[0]) * frac
    ty = float(a[1]) * (1.0 - frac) + float(b[1]) * frac
    tz = float(a[2]) * (1.0 - frac) + float(b[2]) * frac
    n = math.sqrt(tx * tx + ty * ty + tz * tz)
    return (tx / n, ty / n, tz / n)


def plant_step(x: Vec3, v_cmd: Vec3, dt: float) -> Vec3:
    """Velocity-controlled end effector: pure Euler integrator.

    Actuator lag is represented by the command low-pass filter upstream,
    not duplicated here.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (x[0] + v_cmd[0] * dt, x[1] + v_cmd[1] * dt, x[2] + v_cmd[2] * dt)


def resample_uniform(points: list[Vec3], n: int, closed: bool) -> PathSpec:
    """Resample an arbitrary polyline to n arc-length-uniform samples."""
    arr = np.asarray(points, dtype=np.float64)
    if closed:
        arr = np.vstack([arr, arr[0]])
    seg_len = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    if (seg_len <= EPS_LEN).any():
        keep = np.concatenate([[True], seg_len > EPS_LEN])
        arr = arr[keep]
        seg_len = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    if total <= EPS_LEN:
        raise PathError("degenerate polyline (zero total length)")
    # closed paths omit the repeated endpoint so sample spacing stays uniform
    targets = np.linspace(0.0, total, n, endpoint=not closed)
    out = np.empty((n, 3))
    for axis in range(3):
        out[:, axis] = np.interp(targets, cum, arr[:, axis])
    return PathSpec(tuple(map(tuple, out)), closed=closed)


def circle_path(
    center: Vec3 = (0.0, 0.0, 0.0),
    radius: float = 0.05,
    plane: str = "xy",
    direction: str = "cw",
    n: int = DEFAULT_SAMPLES,
) -> PathSpec:
    """Circle sampled uniformly, starting on the first in-plane axis.

    direction 'cw' means clockwise when the plane is viewed from the
    positive side of its normal axis.
    """
    if radius <= 0:
        raise PathError(f"radius must be positive, got {radius}")
    axes = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
    if plane not in axes:
        raise PathError(f"unknown plane {plane!r}, expected one of {sorted(axes)}")
    if direction not in ("cw", "ccw"):
        raise PathError(f"direction must be 'cw' or 'ccw', got {direction!r}")
    a, b = axes[plane]
    sign = -1.0 if direction == "cw" else 1.0
    theta = sign * 2.0 * np.pi * np.arange(n) / n
    pts = np.tile(np.asarray(center, dtype=np.float64), (n, 1))
    pts[:, a] += radius * np.cos(theta)
    pts[:, b] += radius * np.sin(theta)
    return PathSpec(tuple(map(tuple, pts)), closed=True)


def load_path_file(path_file: str) -> PathSpec:
    """Load a path definition file.

    Two forms are accepted. A circle:

        circle center=0,0,0 radius=0.05 plane=xy direction=cw samples=2048

    or an explicit point list, one "x y z" triple per line (meters).
    Point lists are resampled to uniform arc length, keeping their count;
    a list whose last point coincides with the first is treated as closed.
    Lines starting with '#' are ignored.
    """
    with open(path_file) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise PathError(f"{path_file}: empty path file")

    if lines[0].split()[0].lower() == "circle":
        kv = {}
        for tok in lines[0].split()[1:]:
            if "=" not in tok:
                raise PathError(f"{path_file}: bad circle token {tok!r}")
            k, v = tok.split("=", 1)
            kv[k.strip().lower()] = v.strip()
        try:
            center = vec3(*(float(c) for c in kv.get("center", "0,0,0").split(",")))
            radius = float(kv.get("radius", "0.05"))
            n = int(kv.get("samples", str(DEFAULT_SAMPLES)))
        except (TypeError, ValueError) as exc:
            raise PathError(f"{path_file}: bad circle definition: {exc}") from exc
        return circle_path(center, radius, kv.get("plane", "xy"), kv.get("direction", "cw"), n)

    points: list[Vec3] = []
    for ln in lines:
        parts = ln.split()
        if len(parts) != 3:
            raise PathError(f"{path_file}: expected 'x y z', got {ln!r}")
        points.append(vec3(*parts))
    if len(points) < 3:
        raise PathError(f"{path_file}: need at least 3 points")
    closed = False
    if math.dist(points[0], points[-1]) <= EPS_LEN:
        closed = True
        points = points[:-1]
    return resample_uniform(points, max(len(points), 8), closed)
