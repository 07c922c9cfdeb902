"""Per-trial metrics, all pure functions over a TrialRecord.

A trial scores the loops after the discarded warm-up: the scored span
starts on the tick after the last discarded loop completes and ends where
the required loops complete (or at the final frame of a timed-out trial).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PathSpec
from .params import Mode
from .session import TrialRecord
from .vec import EPS_VEL


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class TrialMetrics:
    completion_time: float  # s over the scored loops
    mean_force: float  # N
    rmspe: float  # %
    intervention_level: float  # %
    command_variation: float  # %
    disagreement: float  # %
    mean_eta_h: float
    mean_eta_r: float
    mean_eta_s: float

    def as_dict(self) -> dict:
        return {
            "completion_time_s": self.completion_time,
            "mean_force_n": self.mean_force,
            "rmspe_pct": self.rmspe,
            "intervention_pct": self.intervention_level,
            "command_variation_pct": self.command_variation,
            "disagreement_pct": self.disagreement,
            "mean_eta_h": self.mean_eta_h,
            "mean_eta_r": self.mean_eta_r,
            "mean_eta_s": self.mean_eta_s,
        }


def scored_range(record: TrialRecord) -> tuple[int, int]:
    """Inclusive frame index span of the scored loops."""
    d = record.wall_params.discard_loops
    lb = record.loop_boundaries
    if d > 0 and len(lb) < d:
        return 1, 0  # warm-up never finished: empty span
    start = lb[d - 1] + 1 if d > 0 else 0
    end = lb[-1] if record.completed else len(record.frames) - 1
    return start, end


def _scored(record: TrialRecord) -> list:
    start, end = scored_range(record)
    return record.frames[start:end + 1]


def path_points_at(path: PathSpec, s: np.ndarray) -> np.ndarray:
    """Vectorized polyline interpolation, same convention as path_point."""
    arr = path.as_array()
    m = path.n_segments
    if path.closed:
        u = (s % 1.0) * m
    else:
        u = np.clip(s, 0.0, 1.0) * m
    i = np.minimum(u.astype(np.int64), m - 1)
    frac = (u - i)[:, None]
    j = (i + 1) % path.n_samples
    return arr[i] * (1.0 - frac) + arr[j] * frac


def reference_radius(path: PathSpec) -> float:
    """Characteristic radius: mean distance of the path to its centroid
    (equals the radius for circular paths)."""
    arr = path.as_array()
    return float(np.linalg.norm(arr - arr.mean(axis=0), axis=1).mean())


def rmspe(record: TrialRecord, path: PathSpec | None = None,
          r_ref: float | None = None) -> float:
    """Root mean square percentage error of the traced positions."""
    frames = _scored(record)
    if not frames:
        raise MetricError("no scored frames (trial never passed the warm-up loops)")
    path = path or record.wall_params.path
    if r_ref is None:
        r_ref = reference_radius(path)
    x = np.array([fr.x for fr in frames])
    s_near = np.array([fr.s_near for fr in frames])
    d = np.linalg.norm(x - path_points_at(path, s_near), axis=1)
    return 100.0 * float(np.sqrt(np.mean((d / r_ref) ** 2)))


def intervention_level(record: TrialRecord, threshold: float | None = None) -> float:
    """Share of scored time with human force above the threshold."""
    frames = _scored(record)
    if not frames:
        return 0.0
    if threshold is None:
        threshold = record.wall_params.params.activity_threshold
    fn = np.linalg.norm(np.array([fr.f for fr in frames]), axis=1)
    return 100.0 * float(np.count_nonzero(fn >= threshold)) / len(fn)


def command_variation(record: TrialRecord, rel: float = 0.10,
                      window: float = 0.1, f_floor: float | None = None) -> float:
    """Share of scored time where the force norm moved more than rel
    compared to one window earlier. The floor keeps the relative
    comparison meaningful near zero force."""
    frames = record.frames
    start, end = scored_range(record)
    if start > end:
        return 0.0
    if f_floor is None:
        f_floor = record.wall_params.params.activity_threshold
    k = max(1, int(round(window / record.wall_params.params.dt)))
    fn = np.linalg.norm(np.array([fr.f for fr in frames]), axis=1)
    idx = np.arange(start, end + 1)
    prev_idx = idx - k
    valid = prev_idx >= 0
    prev = fn[prev_idx[valid]]
    cur = fn[idx[valid]]
    exceed = np.abs(cur - prev) > rel * np.maximum(prev, f_floor)
    return 100.0 * float(np.count_nonzero(exceed)) / len(idx)


def disagreement(record: TrialRecord) -> float:
    """Mean angular difference between the human command and the executed
    one, normalized by pi. Zero by construction without assistance, where
    the two commands are the same signal."""
    if record.frames and record.frames[0].mode is Mode.STANDALONE:
        return 0.0
    frames = _scored(record)
    if not frames:
        return 0.0
    vh = np.array([fr.v_h for fr in frames])
    vs = np.array([fr.v_s for fr in frames])
    nh = np.linalg.norm(vh, axis=1)
    ns = np.linalg.norm(vs, axis=1)
    ok = (nh >= EPS_VEL) & (ns >= EPS_VEL)
    if not ok.any():
        return 0.0
    cosang = np.einsum("ij,ij->i", vh[ok], vs[ok]) / (nh[ok] * ns[ok])
    ang = np.arccos(np.clip(cosang, -1.0, 1.0))
    return float(np.mean(ang / math.pi) * 100.0)


def compute_metrics(record: TrialRecord, il_threshold: float | None = None) -> TrialMetrics:
    frames = _scored(record)
    if not frames:
        raise MetricError("no scored frames (trial never passed the warm-up loops)")
    dt = record.wall_params.params.dt
    etas = np.array([(fr.eta_h, fr.eta_r, fr.eta_s) for fr in frames])
    fnorm = np.linalg.norm(np.array([fr.f for fr in frames]), axis=1)
    return TrialMetrics(
        completion_time=frames[-1].t - frames[0].t + dt,
        mean_force=float(fnorm.mean()),
        rmspe=rmspe(record),
        intervention_level=intervention_level(record, il_threshold),
        command_variation=command_variation(record),
        disagreement=disagreement(record),
        mean_eta_h=float(etas[:, 0].mean()),
        mean_eta_r=float(etas[:, 1].mean()),
        mean_eta_s=float(etas[:, 2].mean()),
    )
