import numpy as np
import pytest

from sharedctl.geometry import circle_path
from sharedctl.metrics import compute_metrics
from sharedctl.operator import (
    DOMINANT, NONDOMINANT, NOMINAL_SPEED, OperatorProfile, SyntheticOperator,
    default_population,
)
from sharedctl.params import Mode
from sharedctl.session import Scenario, run_trial
from sharedctl.vec import norm


def quick_scenario(circle, mode=Mode.STANDALONE, loops=2, timeout=120.0):
    return Scenario(path=circle, mode=mode, loops_required=loops,
                    discard_loops=1, timeout=timeout)


class TestForceLaw:
    def test_strength_cap(self, circle, rng):
        prof = OperatorProfile(skill=0.5, f_max=5.0, noise_std=0.8, seed=3)
        op = SyntheticOperator(prof, circle, 0.001)
        x = (0.05, 0.0, 0.0)
        for k in range(3000):
            f = op.force(x, (0.0, 0.0, 0.0), k * 0.001)
            assert norm(f) <= 5.0 + 1e-12
            x = (x[0] + float(rng.uniform(-1e-4, 1e-4)), x[1], x[2])

    def test_zero_strength_never_moves(self, circle):
        prof = OperatorProfile(skill=0.9, f_max=0.0, seed=5)
        rec = run_trial(quick_scenario(circle, timeout=2.0), prof, seed=5)
        assert not rec.completed
        assert all(fr.v_s == (0.0, 0.0, 0.0) for fr in rec.frames)
        assert rec.frames[-1].x == rec.frames[0].x

    def test_determinism(self, circle):
        prof = default_population()[3]
        sc = quick_scenario(circle, timeout=30.0)
        a = run_trial(sc, prof, seed=77)
        b = run_trial(sc, prof, seed=77)
        assert len(a.frames) == len(b.frames)
        assert all(fa.f == fb.f and fa.v_s == fb.v_s
                   for fa, fb in zip(a.frames, b.frames))

    def test_different_seed_different_trace(self, circle):
        prof = default_population()[3]
        sc = quick_scenario(circle, timeout=30.0)
        a = run_trial(sc, prof, seed=77)
        b = run_trial(sc, prof, seed=78)
        assert any(fa.f != fb.f for fa, fb in zip(a.frames, b.frames))

    def test_steady_force_matches_admittance_feel(self, circle):
        # ideal operator: the sustained force is what the virtual damping
        # needs to hold the intended speed
        prof = OperatorProfile(skill=1.0, reaction_delay=0.0, preview=0.4,
                               k_track=3.0, f_max=30.0, noise_std=0.0, seed=1)
        sc = quick_scenario(circle, loops=2, timeout=60.0)
        rec = run_trial(sc, prof, seed=1)
        assert rec.completed
        from sharedctl.metrics import scored_range
        a, b = scored_range(rec)
        forces = [norm(fr.f) for fr in rec.frames[a:b + 1]]
        expected = 83.3 * NOMINAL_SPEED
        assert np.mean(forces) == pytest.approx(expected, rel=0.05)

    def test_hand_penalty_degrades_tracking(self, circle):
        prof = default_population()[0]
        sc = quick_scenario(circle, timeout=120.0)
        dom = compute_metrics(run_trial(sc, prof, seed=11, hand=DOMINANT))
        non = compute_metrics(run_trial(sc, prof, seed=11, hand=NONDOMINANT))
        assert non.rmspe > dom.rmspe


class TestPopulation:
    def test_default_cohort_shape(self):
        pop = default_population()
        assert len(pop) == 10
        assert all(0.3 <= p.skill <= 0.95 for p in pop)
        assert all(0.6 <= p.hand_penalty <= 1.0 for p in pop)
        assert len({p.seed for p in pop}) == 10

    def test_reproducible(self):
        assert default_population() == default_population()
        assert default_population(1) != default_population(2)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            OperatorProfile(skill=1.5)
        with pytest.raises(ValueError):
            OperatorProfile(hand_penalty=-0.1)
        with pytest.raises(ValueError):
            SyntheticOperator(OperatorProfile(), circle_path(), 0.001, hand="left")


class TestSkillEffect:
    def test_rmspe_monotone_in_skill(self, circle):
        # averaged over seeds, higher skill tracks no worse without help
        sc = quick_scenario(circle, loops=2, timeout=120.0)
        means = []
        for skill in (0.2, 0.5, 0.9):
            prof = OperatorProfile(
                skill=skill,
                reaction_delay=0.10 + 0.28 * (1 - skill),
                preview=0.30 + 0.20 * skill,
                k_track=3.2 + 1.2 * (1 - skill),
                f_max=12.0,
                noise_std=0.15 + 0.25 * (1 - skill),
                tremor_hz=9.0,
            )
            vals = []
            for seed in range(20):
                rec = run_trial(sc, prof, seed=1000 + seed)
                if rec.completed:
                    vals.append(compute_metrics(rec).rmspe)
            assert len(vals) >= 18
            means.append(np.mean(vals))
        assert means[0] >= means[1] >= means[2]
