"""Acceptance suite: one test per release criterion, each printing a
PASS line with the measured margin. Run with `pytest -s` to see them.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats as sps

from sharedctl.config import scenario_from_dict
from sharedctl.control import (
    AdmittanceState, FilterState, LoopState, admittance_step, finalize,
    performance, shared_tick,
)
from sharedctl.experiment import run_matrix
from sharedctl.follower import FollowerState, nearest_param, select_goal, sphere_radius
from sharedctl.geometry import circle_path, path_point, plant_step, resample_uniform
from sharedctl.metrics import compute_metrics
from sharedctl.operator import default_population
from sharedctl.params import ControllerParams, ImpedanceParams, Mode
from sharedctl.session import Scenario, read_telemetry, run_trial, write_telemetry
from sharedctl.stats import anova_oneway
from sharedctl.vec import ZERO3, is_finite, norm

MASTER_SEED = 20240613


def _ok(name, detail=""):
    print(f"\nACCEPTANCE PASS: {name}" + (f" ({detail})" if detail else ""))


def test_admittance_steady_state():
    params = ControllerParams(M=1.0, B=83.3)
    st = AdmittanceState()
    f = (8.33, 0.0, 0.0)
    t0 = time.perf_counter()
    v_h = ZERO3
    for _ in range(int(round(0.1 / params.dt))):
        st, v_h = admittance_step(st, f, params)
    wall = time.perf_counter() - t0
    err = abs(v_h[0] - 0.1)
    assert err <= 1e-4
    assert v_h[1] == 0.0 and v_h[2] == 0.0
    assert wall < 1.0
    _ok("admittance steady state", f"err={err:.2e}, wall={wall*1e3:.1f} ms")


def test_performance_point_checks():
    params = ControllerParams(C=(1.0, 1.0), w=(0.5, 0.5))
    # alpha = 0 on both factors
    p = performance((0.05, 0.0, 0.0), (0.02, 0.0, 0.0), (1.0, 0.0, 0.0), params)
    assert p.eta1 == 1.0 and p.eta2 == 1.0 and p.eta == 1.0
    # alpha = pi/2 against the tangent, C = 1
    p = performance((0.0, 0.05, 0.0), (0.0, 0.01, 0.0), (1.0, 0.0, 0.0), params)
    assert abs(p.eta2 - math.exp(-math.pi / 2.0)) <= 1e-6
    # and against the previous command
    p = performance((0.0, 0.05, 0.0), (0.05, 0.0, 0.0), (0.0, 1.0, 0.0), params)
    assert abs(p.eta1 - math.exp(-math.pi / 2.0)) <= 1e-6
    _ok("performance formula point checks")


def _random_path(rng):
    kind = rng.integers(0, 4)
    if kind == 0:
        return circle_path(center=tuple(rng.uniform(-0.05, 0.05, 3)),
                           radius=float(rng.uniform(0.02, 0.08)),
                           plane=("xy", "xz", "yz")[int(rng.integers(3))],
                           n=int(rng.integers(256, 1025)))
    if kind == 1:  # wiggly closed curve
        base_r = float(rng.uniform(0.03, 0.08))
        theta = np.linspace(0, 2 * np.pi, 600, endpoint=False)
        r = base_r * (1.0 + 0.15 * np.sin(3 * theta + rng.uniform(0, 6))
                      + 0.08 * np.sin(5 * theta + rng.uniform(0, 6)))
        pts = np.stack([r * np.cos(theta), r * np.sin(theta),
                        0.01 * np.sin(2 * theta)], axis=1)
        return resample_uniform([tuple(p) for p in pts],
                                int(rng.integers(256, 1025)), closed=True)
    if kind == 2:  # straight segment
        a = rng.uniform(-0.1, 0.1, 3)
        b = a + rng.uniform(0.05, 0.2, 3)
        return resample_uniform([tuple(a), tuple(b)],
                                int(rng.integers(64, 257)), closed=False)
    # open arc
    theta = np.linspace(0, rng.uniform(1.5, 4.0), 400)
    r = float(rng.uniform(0.03, 0.08))
    pts = [(r * math.cos(t), r * math.sin(t), 0.0) for t in theta]
    return resample_uniform(pts, int(rng.integers(128, 513)), closed=False)


def _brute_goal(path, x, s_near, rho, n_grid=100_000):
    if path.closed:
        span = 0.5
        s = (s_near + np.linspace(0.0, span, n_grid, endpoint=False)[1:]) % 1.0
    else:
        span = 1.0 - s_near
        if span <= 1e-12:
            return 1.0
        s = s_near + np.linspace(0.0, span, n_grid)[1:]
    m = path.n_segments
    u = (s % 1.0 if path.closed else np.clip(s, 0, 1)) * m
    i = np.minimum(u.astype(np.int64), m - 1)
    frac = (u - i)[:, None]
    arr = path.as_array()
    pts = arr[i] * (1 - frac) + arr[(i + 1) % path.n_samples] * frac
    err = np.abs(np.linalg.norm(pts - np.asarray(x), axis=1) - rho)
    band = err.min() + path.total_length * span / n_grid
    in_band = np.nonzero(err <= band)[0]
    first = in_band[0]
    run_end = first
    while run_end + 1 < len(err) and err[run_end + 1] <= band:
        run_end += 1
    k = first
    while k < run_end and err[k + 1] < err[k]:
        k += 1
    return float(s[k])


def test_path_follower_oracle_equivalence():
    params = ControllerParams()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(20240613)))
    t0 = time.perf_counter()
    worst = 0.0
    progress_violations = 0
    for _ in range(1000):
        path = _random_path(rng)
        scale_out = float(rng.uniform(0.0, 0.12))
        x = tuple(np.asarray(path_point(path, float(rng.uniform(0, 1))))
                  + rng.uniform(-scale_out, scale_out, 3))
        state = FollowerState()
        goal, s_c, degraded = select_goal(path, x, state, params)
        s_near, d = nearest_param(path, x)
        fwd = (s_c - s_near) % 1.0 if path.closed else s_c - s_near
        at_open_end = not path.closed and s_near >= 1.0 - 1e-12
        if fwd <= 0.0 and not at_open_end:
            progress_violations += 1
        s_brute = _brute_goal(path, x, s_near, sphere_radius(d, params))
        err = abs(s_c - s_brute)
        if path.closed:
            err = min(err, 1.0 - err)
        tol = 1.0 / path.n_segments + 0.5 / 100_000
        worst = max(worst, err - tol)
        assert err <= tol, (err, tol, path.closed, path.n_samples, x)
    wall = time.perf_counter() - t0
    assert progress_violations == 0
    assert wall < 30.0
    _ok("path-follower oracle equivalence",
        f"1000 instances, wall={wall:.1f} s, 0 progress violations")


def test_saturation_and_range_fuzz():
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(8787)))
    total = 0
    t0 = time.perf_counter()
    while total < 1_000_000:
        n = int(rng.choice([256, 512, 512, 1024, 2048]))
        path = circle_path(radius=float(rng.uniform(0.02, 0.08)), n=n) \
            if rng.random() < 0.7 else _random_path(rng)
        params = ControllerParams(
            M=float(rng.uniform(0.5, 2.0)),
            B=float(rng.uniform(20.0, 150.0)),
            K_a=float(rng.uniform(0.2, 3.0)),
            lam=float(rng.uniform(1.005, 1.2)),
            rho_min=float(rng.uniform(0.005, 0.03)),
            v_max=float(rng.uniform(0.1, 0.5)),
            filter_cutoff=float(rng.uniform(0.5, 5.0)),
            gate_enabled=bool(rng.random() < 0.7),
        )
        ls = LoopState()
        x = path_point(path, float(rng.uniform(0, 1)))
        f = ZERO3
        chunk = int(rng.integers(20_000, 60_000))
        for k in range(chunk):
            if k % 37 == 0:
                f = tuple(rng.uniform(-40, 40, 3))
            fr = shared_tick(k * params.dt, x, f, path, ls, params)
            assert norm(fr.v_s) <= params.v_max + 1e-12
            assert 0.0 <= fr.eta_h <= 1.0
            assert 0.0 <= fr.eta_r <= 1.0
            assert 0.0 <= fr.eta_s <= 1.0
            assert is_finite(fr.v_s) and is_finite(fr.v_h) and is_finite(fr.x)
            x = plant_step(x, fr.v_s, params.dt)
        total += chunk
    wall = time.perf_counter() - t0
    assert wall < 60.0
    _ok("saturation and range fuzz", f"{total} ticks, wall={wall:.1f} s")


def test_standalone_equivalence():
    from sharedctl.control import GATE_WINDOW_S

    scenario = Scenario(path=circle_path(), mode=Mode.STANDALONE,
                        loops_required=2, discard_loops=1, timeout=60.0,
                        plane_lock=None)
    rec = run_trial(scenario, default_population()[2], seed=606)
    params = scenario.params
    adm, filt = AdmittanceState(), FilterState()
    last_active = -math.inf
    for fr in rec.frames:
        adm, v_h = admittance_step(adm, fr.f, params)
        filt, v_s = finalize(v_h, 1.0, filt, params)
        if norm(fr.f) >= params.activity_threshold:
            last_active = fr.t
        if (fr.t - last_active) > GATE_WINDOW_S:
            v_s = ZERO3
        assert fr.v_s == v_s  # bit identical
    _ok("standalone output-stage equivalence",
        f"{len(rec.frames)} ticks bit-identical")


def test_directional_reproduction():
    scenario = scenario_from_dict({"timeout_s": 240.0})
    t0 = time.perf_counter()
    report = run_matrix(default_population(), scenario,
                        master_seed=MASTER_SEED, telemetry=False)
    wall = time.perf_counter() - t0
    assert wall < 300.0
    assert not report.failures
    assert len(report.outcomes) == 60

    by_id = {ln.result.id: ln for ln in report.hypotheses}
    gated = ("H1", "H2", "H4", "F-IC", "D-IC")
    for hyp in gated:
        ln = by_id[hyp]
        assert ln.direction_ok, f"{hyp} direction violated: {ln.means}"
        assert ln.result.p < 0.05, f"{hyp} p={ln.result.p}"
    tercile = by_id["H3'"]
    assert tercile.direction_ok, f"H3' direction violated: {tercile.means}"

    detail = ", ".join(f"{h}: p={by_id[h].result.p:.2g}" for h in gated)
    _ok("directional reproduction",
        f"60 trials in {wall:.0f} s; {detail}; "
        f"H3' gap {tercile.means['standalone']:.3f} -> {tercile.means['shared']:.3f} "
        f"(p={tercile.result.p:.2g}, sign reference)")


def test_anova_reference_equivalence():
    fixtures = [
        [[6.9, 5.4, 5.8, 4.6, 4.0], [8.3, 6.8, 7.8, 9.2, 6.5],
         [8.0, 10.5, 8.1, 6.9, 9.3]],
        [[1.0, 2.0, 3.0, 4.0], [2.0, 3.0, 4.0, 5.0]],
        [[0.1, 0.2, 0.15, 0.17, 0.3], [0.12, 0.2, 0.22, 0.18, 0.29],
         [0.5, 0.61, 0.55, 0.48, 0.52], [0.2, 0.3, 0.25, 0.28, 0.33]],
    ]
    for groups in fixtures:
        r = anova_oneway(groups)
        ref = sps.f_oneway(*groups)
        assert abs(r.statistic - ref.statistic) <= 1e-8
        assert abs(r.p - ref.pvalue) <= 1e-8
    r = anova_oneway([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
    assert r.statistic == 0.0 and r.p == 1.0
    _ok("ANOVA reference equivalence")


def test_metric_recomputation(tmp_path):
    pop = default_population()
    for mode, seed in ((Mode.SHARED, 17), (Mode.IMPEDANCE, 18)):
        scenario = Scenario(path=circle_path(), mode=mode, loops_required=2,
                            discard_loops=1, timeout=120.0)
        rec = run_trial(scenario, pop[4], seed=seed)
        assert rec.completed
        live = compute_metrics(rec).as_dict()
        log = str(tmp_path / f"{mode.value}.log")
        write_telemetry(rec, log)
        replayed = compute_metrics(read_telemetry(log)).as_dict()
        for key, val in live.items():
            assert abs(replayed[key] - val) <= 1e-9 * max(1.0, abs(val)), key
    _ok("metric recomputation from telemetry", "two modes, 1e-9")


def test_live_parity_secondary(tmp_path):
    # SECONDARY criterion, service half: a scripted client replaying a
    # recorded force trace at ~100 Hz reproduces the offline metrics within
    # the zero-order-hold tolerance. (The browser-side 100 msg/s load test
    # lives in the frontend suite.)
    from fastapi.testclient import TestClient

    from sharedctl.service import create_app

    scenario = Scenario(path=circle_path(), mode=Mode.SHARED, loops_required=2,
                        discard_loops=1, timeout=90.0)
    offline = run_trial(scenario, default_population()[1], seed=2024)
    assert offline.completed
    ref = compute_metrics(offline)

    app = create_app(data_dir=str(tmp_path), max_sessions=2)
    with TestClient(app) as client:
        sid = client.post("/sessions", json={
            "mode": "shared", "loops": 2, "timeout_s": 90.0,
        }).json()["id"]
        done = None
        with client.websocket_connect(f"/sessions/{sid}/io") as ws:
            stride = 10  # 100 Hz client against the 1 kHz loop
            msgs = offline.frames[::stride]
            sent = 0
            for fr in msgs:
                ws.send_json({"v": 1, "t": fr.t,
                              "fx": fr.f[0], "fy": fr.f[1], "fz": fr.f[2]})
                sent += 1
                if sent % 100 == 0:
                    while True:
                        m = ws.receive_json()
                        if m["type"] == "done":
                            done = m
                            break
                        if m["type"] == "frame" and m["t"] >= fr.t - 0.2:
                            break
                if done:
                    break
            while done is None:
                ws.send_json({"v": 1, "t": offline.frames[-1].t + 1.0,
                              "fx": 0.0, "fy": 0.0, "fz": 0.0})
                for _ in range(200):
                    m = ws.receive_json()
                    if m["type"] == "done":
                        done = m
                        break

    assert done["completed"], "live session did not finish the loops"
    got = done["metrics"]
    rms_err = abs(got["rmspe_pct"] - ref.rmspe) / ref.rmspe
    dis_err = abs(got["disagreement_pct"] - ref.disagreement) / max(ref.disagreement, 1e-9)
    assert rms_err <= 0.02, f"RMSPE off by {rms_err:.1%}"
    assert dis_err <= 0.02, f"disagreement off by {dis_err:.1%}"
    _ok("live replay parity (secondary)",
        f"RMSPE {ref.rmspe:.3f} vs {got['rmspe_pct']:.3f} ({rms_err:.2%}), "
        f"disagreement {ref.disagreement:.3f} vs {got['disagreement_pct']:.3f} ({dis_err:.2%})")
