import math

import numpy as np
import pytest

from sharedctl.control import ControlFrame
from sharedctl.geometry import circle_path, path_point, path_tangent
from sharedctl.metrics import (
    MetricError, command_variation, compute_metrics, disagreement,
    intervention_level, reference_radius, rmspe, scored_range,
)
from sharedctl.operator import default_population
from sharedctl.params import Mode
from sharedctl.session import Scenario, TrialRecord, run_trial
from sharedctl.vec import ZERO3, scale

R = 0.05


def synthetic_record(circle, n=1000, radial_offset=0.0, force=(1.0, 0.0, 0.0),
                     mode=Mode.SHARED, v_h=None, v_s=None, warmup=0):
    """Hand-built record walking the path; the first `warmup` frames form a
    discarded loop so scored frames always have history behind them."""
    frames = []
    for k in range(n):
        s = k / n
        p = path_point(circle, s)
        t = path_tangent(circle, s)
        r = math.sqrt(p[0] ** 2 + p[1] ** 2)
        x = (p[0] * (r + radial_offset) / r, p[1] * (r + radial_offset) / r, p[2])
        vh = v_h(k) if v_h else scale(t, 0.05)
        vs = v_s(k) if v_s else scale(t, 0.05)
        f = force(k) if callable(force) else force
        frames.append(ControlFrame(
            t=k * 0.001, x=x, f=f, v_h=vh, v_r=vs, v_hat_s=vs, v_s=vs,
            eta_h=0.9, eta_r=0.95, eta_s=0.92, eta_factors=(), alphas=(),
            goal=p, s_near=s, s_c=s, mode=mode, degraded=False,
        ))
    if warmup:
        sc = Scenario(path=circle, mode=mode, loops_required=2,
                      discard_loops=1, timeout=10.0)
        return TrialRecord(frames, [warmup - 1, n - 1], True, sc)
    sc = Scenario(path=circle, mode=mode, loops_required=1, discard_loops=0,
                  timeout=10.0)
    return TrialRecord(frames, [n - 1], True, sc)


class TestRmspe:
    def test_zero_on_path(self, circle):
        assert rmspe(synthetic_record(circle)) == pytest.approx(0.0, abs=1e-9)

    def test_constant_offset_ratio(self, circle):
        rec = synthetic_record(circle, radial_offset=0.005)
        assert rmspe(rec) == pytest.approx(10.0, abs=0.01)

    def test_reference_radius_is_circle_radius(self, circle):
        assert reference_radius(circle) == pytest.approx(R, rel=1e-6)

    def test_no_scored_frames_raises(self, circle):
        rec = synthetic_record(circle)
        rec.loop_boundaries = []
        rec.completed = False
        rec.wall_params = Scenario(path=circle, loops_required=2,
                                   discard_loops=1, timeout=10.0)
        with pytest.raises(MetricError):
            rmspe(rec)


class TestInterventionLevel:
    def test_always_above(self, circle):
        rec = synthetic_record(circle, force=(2.0, 0.0, 0.0))
        assert intervention_level(rec, threshold=0.5) == 100.0

    def test_zero_force(self, circle):
        rec = synthetic_record(circle, force=ZERO3)
        assert intervention_level(rec, threshold=0.5) == 0.0

    def test_defaults_to_activity_threshold(self, circle):
        rec = synthetic_record(circle, force=(0.4, 0.0, 0.0))
        assert intervention_level(rec) == 0.0  # default threshold 0.5 N


class TestCommandVariation:
    def test_constant_force(self, circle):
        rec = synthetic_record(circle, force=(3.0, 0.0, 0.0))
        assert command_variation(rec) == 0.0

    def test_alternating_20_percent(self, circle):
        # norm flips between 2.0 and 2.4 every window: every comparison
        # against one window back exceeds 10%
        def f(k):
            return (2.4, 0.0, 0.0) if (k // 100) % 2 else (2.0, 0.0, 0.0)
        rec = synthetic_record(circle, force=f, warmup=100)
        assert command_variation(rec, rel=0.10, window=0.1) == 100.0

    def test_small_wiggle_under_threshold(self, circle):
        def f(k):
            return (2.0 + 0.05 * ((k // 100) % 2), 0.0, 0.0)
        rec = synthetic_record(circle, force=f)
        assert command_variation(rec, rel=0.10, window=0.1) == 0.0


class TestDisagreement:
    def test_parallel(self, circle):
        rec = synthetic_record(circle)
        assert disagreement(rec) == pytest.approx(0.0, abs=1e-6)

    def test_perpendicular(self, circle):
        def vh(k):
            return (0.05, 0.0, 0.0)

        def vs(k):
            return (0.0, 0.05, 0.0)
        rec = synthetic_record(circle, v_h=vh, v_s=vs)
        assert disagreement(rec) == pytest.approx(50.0, abs=1e-9)

    def test_standalone_by_construction(self, circle):
        def vh(k):
            return (0.05, 0.0, 0.0)

        def vs(k):
            return (0.0, 0.05, 0.0)
        rec = synthetic_record(circle, mode=Mode.STANDALONE, v_h=vh, v_s=vs)
        assert disagreement(rec) == 0.0

    def test_skips_tiny_commands(self, circle):
        def vh(k):
            return (1e-9, 0.0, 0.0)
        rec = synthetic_record(circle, v_h=vh)
        assert disagreement(rec) == 0.0


class TestScoredRange:
    def test_discard_removes_first_loop(self, circle):
        rec = run_trial(
            Scenario(path=circle, mode=Mode.SHARED, loops_required=2,
                     discard_loops=1, timeout=60.0),
            default_population()[0], seed=31)
        start, end = scored_range(rec)
        assert start == rec.loop_boundaries[0] + 1
        assert end == rec.loop_boundaries[-1]

    def test_metrics_bundle(self, circle):
        rec = run_trial(
            Scenario(path=circle, mode=Mode.SHARED, loops_required=2,
                     discard_loops=1, timeout=60.0),
            default_population()[0], seed=31)
        m = compute_metrics(rec)
        assert 0.0 <= m.intervention_level <= 100.0
        assert 0.0 <= m.command_variation <= 100.0
        assert 0.0 <= m.disagreement <= 100.0
        assert 0.0 <= m.mean_eta_h <= 1.0
        assert m.completion_time > 0
        assert m.rmspe > 0
