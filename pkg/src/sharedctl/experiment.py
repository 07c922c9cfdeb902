"""Experiment matrix runner: profiles x hands x modes, metrics, hypothesis
tests and report files."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import MetricError, TrialMetrics, compute_metrics, path_points_at, scored_range
from .operator import DOMINANT, NONDOMINANT, OperatorProfile
from .params import Mode
from .session import Scenario, TrialRecord, run_trial, write_telemetry
from .stats import HypothesisResult, StatsError, anova_oneway, levene_anova

MODE_CODE = {Mode.STANDALONE: "A", Mode.SHARED: "S", Mode.IMPEDANCE: "I"}
HAND_CODE = {DOMINANT: "D", NONDOMINANT: "N"}

METRIC_COLUMNS = (
    "trial_id", "profile", "hand", "mode", "seed", "completed",
    "completion_time_s", "mean_force_n", "rmspe_pct", "intervention_pct",
    "command_variation_pct", "disagreement_pct",
    "mean_eta_h", "mean_eta_r", "mean_eta_s",
)

_HIST_BINS = 40
_HIST_PAIRS = (  # x-axis, y-axis, x-range
    ("force", "eta", (0.0, 10.0)),
    ("force", "disagreement", (0.0, 10.0)),
    ("disagreement", "eta", (0.0, 100.0)),
)


@dataclass
class TrialOutcome:
    trial_id: str
    profile: str
    hand: str
    mode: Mode
    seed: int
    completed: bool
    metrics: TrialMetrics | None
    error: str = ""

    def row(self) -> dict:
        base = {
            "trial_id": self.trial_id, "profile": self.profile,
            "hand": self.hand, "mode": self.mode.value,
            "seed": self.seed, "completed": self.completed,
        }
        if self.metrics is not None:
            base.update(self.metrics.as_dict())
        return base


@dataclass
class HypothesisLine:
    """One report row: the test plus the group means it compares."""

    result: HypothesisResult
    data: str
    means: dict[str, float]
    expected: str = ""  # e.g. "shared < standalone", empty when two-sided

    @property
    def direction_ok(self) -> bool | None:
        if not self.expected:
            return None
        lo_label, _, hi_label = self.expected.partition(" < ")
        return self.means[lo_label.strip()] < self.means[hi_label.strip()]


@dataclass
class MatrixReport:
    outcomes: list[TrialOutcome]
    hypotheses: list[HypothesisLine] = field(default_factory=list)
    histograms: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[TrialOutcome]:
        return [o for o in self.outcomes if not o.completed or o.metrics is None]

    def rows(self) -> list[dict]:
        return [o.row() for o in self.outcomes]


def _metric_by(outcomes, mode: Mode, key: str, hand: str | None = None) -> list[float]:
    return [
        getattr(o.metrics, key)
        for o in outcomes
        if o.metrics is not None and o.mode is mode
        and (hand is None or o.hand == hand)
    ]


def _hand_gaps(outcomes, mode: Mode, profiles: list[str]) -> list[float]:
    """Per-user |dominant - nondominant| gap of mean human-command
    performance."""
    gaps = []
    for name in profiles:
        pair = {}
        for o in outcomes:
            if o.profile == name and o.mode is mode and o.metrics is not None:
                pair[o.hand] = o.metrics.mean_eta_h
        if DOMINANT in pair and NONDOMINANT in pair:
            gaps.append(abs(pair[DOMINANT] - pair[NONDOMINANT]))
        else:
            gaps.append(float("nan"))
    return gaps


def evaluate_hypotheses(outcomes: list[TrialOutcome],
                        profiles: list[str]) -> list[HypothesisLine]:
    """The Table-style battery: five standalone/shared contrasts, the
    restricted hand-asymmetry retest, and the two baseline findings."""
    lines: list[HypothesisLine] = []

    def contrast(hyp_id, data, key, a_mode, b_mode, expected="", use_levene=False):
        a = _metric_by(outcomes, a_mode, key)
        b = _metric_by(outcomes, b_mode, key)
        means = {a_mode.value: float(np.mean(a)) if a else float("nan"),
                 b_mode.value: float(np.mean(b)) if b else float("nan")}
        if use_levene:
            means = {a_mode.value: float(np.var(a)) if a else float("nan"),
                     b_mode.value: float(np.var(b)) if b else float("nan")}
        desc = f"{a_mode.value} (n={len(a)}) vs {b_mode.value} (n={len(b)})"
        try:
            test = levene_anova if use_levene else anova_oneway
            res = test([a, b], id=hyp_id, description=desc)
        except StatsError as exc:
            res = HypothesisResult(hyp_id, float("nan"), float("nan"),
                                   f"not computable: {exc}")
        lines.append(HypothesisLine(res, data, means, expected))

    contrast("H1", "global command performance (mean eta_s per trial)",
             "mean_eta_s", Mode.STANDALONE, Mode.SHARED,
             expected="standalone < shared")
    contrast("H2", "trial RMSPE", "rmspe", Mode.STANDALONE, Mode.SHARED,
             expected="shared < standalone")

    gaps_a = _hand_gaps(outcomes, Mode.STANDALONE, profiles)
    gaps_s = _hand_gaps(outcomes, Mode.SHARED, profiles)
    ok = [i for i in range(len(profiles))
          if not (np.isnan(gaps_a[i]) or np.isnan(gaps_s[i]))]
    ga = [gaps_a[i] for i in ok]
    gs = [gaps_s[i] for i in ok]

    def gap_line(hyp_id, idx, note):
        a = [ga[i] for i in idx]
        s = [gs[i] for i in idx]
        means = {"standalone": float(np.mean(a)) if a else float("nan"),
                 "shared": float(np.mean(s)) if s else float("nan")}
        try:
            res = anova_oneway([a, s], id=hyp_id,
                               description=f"{note} (n={len(a)} users)")
        except StatsError as exc:
            res = HypothesisResult(hyp_id, float("nan"), float("nan"),
                                   f"not computable: {exc}")
        lines.append(HypothesisLine(
            res, "per-user hand gap of mean eta_h", means,
            expected="shared < standalone"))

    gap_line("H3", list(range(len(ok))), "all users")
    order = np.argsort(ga)[::-1]
    tercile = list(order[:max(2, round(len(ok) / 3))])
    gap_line("H3'", tercile, "upper tercile by standalone gap")

    contrast("H4", "RMSPE dispersion (Levene deviations)", "rmspe",
             Mode.STANDALONE, Mode.SHARED, expected="shared < standalone",
             use_levene=True)
    contrast("H5", "command variation", "command_variation",
             Mode.STANDALONE, Mode.SHARED)
    contrast("F-IC", "mean human force", "mean_force",
             Mode.SHARED, Mode.IMPEDANCE, expected="shared < impedance")
    contrast("D-IC", "disagreement", "disagreement",
             Mode.SHARED, Mode.IMPEDANCE, expected="shared < impedance")
    return lines


def _frame_hist_arrays(record: TrialRecord):
    start, end = scored_range(record)
    frames = record.frames[start:end + 1]
    f = np.linalg.norm(np.array([fr.f for fr in frames]), axis=1)
    eta = np.array([fr.eta_s for fr in frames])
    vh = np.array([fr.v_h for fr in frames])
    vs = np.array([fr.v_s for fr in frames])
    nh = np.linalg.norm(vh, axis=1)
    ns = np.linalg.norm(vs, axis=1)
    ok = (nh > 1e-6) & (ns > 1e-6)
    dis = np.zeros(len(frames))
    cos = np.einsum("ij,ij->i", vh[ok], vs[ok]) / (nh[ok] * ns[ok])
    dis[ok] = np.degrees(np.arccos(np.clip(cos, -1, 1))) / 1.8  # % of pi
    return {"force": f, "eta": eta, "disagreement": dis}


def _accumulate_hists(hists: dict, mode: Mode, record: TrialRecord) -> None:
    data = _frame_hist_arrays(record)
    for xk, yk, xr in _HIST_PAIRS:
        yr = (0.0, 1.0) if yk == "eta" else (0.0, 100.0)
        h, _, _ = np.histogram2d(data[xk], data[yk], bins=_HIST_BINS,
                                 range=(xr, yr))
        key = (mode.value, xk, yk)
        if key not in hists:
            hists[key] = {"counts": np.zeros((_HIST_BINS, _HIST_BINS)),
                          "x_range": xr, "y_range": yr}
        hists[key]["counts"] += h


def run_matrix(
    profiles: list[OperatorProfile],
    scenario: Scenario,
    modes: tuple[Mode, ...] = (Mode.STANDALONE, Mode.SHARED, Mode.IMPEDANCE),
    hands: tuple[str, ...] = (DOMINANT, NONDOMINANT),
    master_seed: int = 20240613,
    out_dir: str | None = None,
    telemetry: bool = True,
    progress=None,
) -> MatrixReport:
    """Run every profile x hand x mode trial and build the report.

    Trial seeds derive from the master seed in a fixed order, so the whole
    report is byte-reproducible. Failed trials are recorded and excluded
    from the statistics.
    """
    plan = [(p, hand, mode) for p in profiles for hand in hands for mode in modes]
    seeds = np.random.SeedSequence(master_seed).generate_state(len(plan)).tolist()

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        if telemetry:
            os.makedirs(os.path.join(out_dir, "telemetry"), exist_ok=True)

    outcomes: list[TrialOutcome] = []
    hists: dict = {}
    for i, (prof, hand, mode) in enumerate(plan):
        trial_id = f"{prof.name or 'op'}_{HAND_CODE[hand]}{MODE_CODE[mode]}"
        sc = replace(scenario, mode=mode)
        record = run_trial(sc, prof, seed=seeds[i], hand=hand)
        record.meta.update(trial_id=trial_id, profile=prof.name, hand=hand)
        metrics = None
        err = ""
        if record.completed:
            try:
                metrics = compute_metrics(record)
            except MetricError as exc:
                err = str(exc)
        else:
            err = "timeout"
        outcomes.append(TrialOutcome(
            trial_id, prof.name, hand, mode, seeds[i],
            record.completed, metrics, err))
        if metrics is not None:
            _accumulate_hists(hists, mode, record)
        if out_dir and telemetry:
            write_telemetry(record, os.path.join(out_dir, "telemetry", trial_id + ".log"))
        if progress is not None:
            progress(i + 1, len(plan), trial_id, metrics)

    report = MatrixReport(outcomes, histograms=hists)
    report.hypotheses = evaluate_hypotheses(outcomes, [p.name for p in profiles])
    if out_dir:
        write_metrics_csv(report, os.path.join(out_dir, "metrics.csv"))
        write_hypotheses(report, os.path.join(out_dir, "hypotheses.txt"))
        write_histograms(report, out_dir)
    return report


def write_metrics_csv(report: MatrixReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(METRIC_COLUMNS) + "\n")
        for row in report.rows():
            fh.write(",".join(repr(row[c]) if isinstance(row.get(c), float)
                              else str(row.get(c, "")) for c in METRIC_COLUMNS) + "\n")


def rows_from_metrics_csv(path: str) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            row: dict = dict(zip(header, parts))
            for k in header[6:]:
                if row.get(k):
                    row[k] = float(row[k])
            row["completed"] = row.get("completed") == "True"
            if row.get("seed"):
                row["seed"] = int(row["seed"])
            rows.append(row)
    return rows


def hypotheses_from_rows(rows: list[dict]) -> list[HypothesisLine]:
    """Rebuild the hypothesis battery from a metrics table (the `stats`
    subcommand path)."""
    outcomes = []
    profiles: list[str] = []
    for row in rows:
        if not row.get("completed"):
            outcomes.append(TrialOutcome(
                row["trial_id"], row["profile"], row["hand"],
                Mode(row["mode"]), row.get("seed", 0), False, None, "timeout"))
            continue
        m = TrialMetrics(
            completion_time=row["completion_time_s"],
            mean_force=row["mean_force_n"],
            rmspe=row["rmspe_pct"],
            intervention_level=row["intervention_pct"],
            command_variation=row["command_variation_pct"],
            disagreement=row["disagreement_pct"],
            mean_eta_h=row["mean_eta_h"],
            mean_eta_r=row["mean_eta_r"],
            mean_eta_s=row["mean_eta_s"],
        )
        outcomes.append(TrialOutcome(
            row["trial_id"], row["profile"], row["hand"], Mode(row["mode"]),
            row.get("seed", 0), True, m))
        if row["profile"] not in profiles:
            profiles.append(row["profile"])
    return evaluate_hypotheses(outcomes, profiles)


def format_hypotheses(lines: list[HypothesisLine]) -> str:
    out = ["hypothesis report", "=" * 72]
    for ln in lines:
        r = ln.result
        means = "  ".join(f"{k}={v:.4g}" for k, v in ln.means.items())
        verdict = ""
        if ln.expected:
            arrow = "holds" if ln.direction_ok else "DOES NOT HOLD"
            verdict = f"  expected {ln.expected}: {arrow}"
        out.append(f"{r.id:4s} {ln.data}")
        out.append(f"     groups: {r.groups}")
        out.append(f"     means: {means}{verdict}")
        f_str = "inf" if np.isinf(r.statistic) else f"{r.statistic:.4f}"
        out.append(f"     F={f_str}  p={r.p:.6g}")
        out.append("")
    return "\n".join(out)


def write_hypotheses(report: MatrixReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(format_hypotheses(report.hypotheses) + "\n")


def write_histograms(report: MatrixReport, out_dir: str) -> None:
    """Binned scatter tables, one CSV per (mode, pair)."""
    for (mode, xk, yk), data in sorted(report.histograms.items()):
        path = os.path.join(out_dir, f"hist_{mode}_{xk}_{yk}.csv")
        xr, yr = data["x_range"], data["y_range"]
        with open(path, "w") as fh:
            fh.write(f"# x={xk} range={xr}, y={yk} range={yr}, "
                     f"bins={_HIST_BINS}x{_HIST_BINS}; counts, rows follow x\n")
            for row in data["counts"]:
                fh.write(",".join(str(int(v)) for v in row) + "\n")
