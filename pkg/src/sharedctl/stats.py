"""One-way ANOVA for the hypothesis tests.

The F statistic is computed from the classical sum-of-squares
decomposition; only the F-distribution tail comes from scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class HypothesisResult:
    id: str
    statistic: float  # F value
    p: float
    groups: str  # human-readable description of the grouping

    def __str__(self) -> str:
        f = "inf" if math.isinf(self.statistic) else f"{self.statistic:.4g}"
        return f"{self.id}: F={f} p={self.p:.4g} [{self.groups}]"


def anova_oneway(groups: Sequence[Sequence[float]], id: str = "",
                 description: str = "") -> HypothesisResult:
    """Classical one-way ANOVA over k groups.

    Degenerate data is resolved explicitly: all-identical values give
    F=0, p=1; zero within-group variance with distinct group means is an
    exact separation, reported as p=0.
    """
    if len(groups) < 2:
        raise StatsError(f"need at least 2 groups, got {len(groups)}")
    arrs = [np.asarray(g, dtype=np.float64) for g in groups]
    if any(len(a) < 2 for a in arrs):
        raise StatsError("every group needs at least 2 samples")
    if any(not np.isfinite(a).all() for a in arrs):
        raise StatsError("non-finite sample values")

    k = len(arrs)
    n_total = sum(len(a) for a in arrs)
    grand = sum(a.sum() for a in arrs) / n_total
    ss_between = sum(len(a) * (a.mean() - grand) ** 2 for a in arrs)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrs)
    df_between = k - 1
    df_within = n_total - k

    if ss_within == 0.0:
        if ss_between == 0.0:
            return HypothesisResult(id, 0.0, 1.0, description)
        # zero within-group variance with distinct means: exact separation
        return HypothesisResult(id, math.inf, 0.0,
                                (description + " [exact separation]").strip())
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p = float(special.fdtrc(df_between, df_within, f_stat))
    return HypothesisResult(id, float(f_stat), p, description)


def levene_anova(groups: Sequence[Sequence[float]], id: str = "",
                 description: str = "") -> HypothesisResult:
    """Dispersion comparison: one-way ANOVA over absolute deviations from
    each group's mean (Levene's construction), reusing anova_oneway."""
    devs = [np.abs(np.asarray(g, dtype=np.float64)
                   - np.asarray(g, dtype=np.float64).mean()) for g in groups]
    return anova_oneway(devs, id=id, description=description)
