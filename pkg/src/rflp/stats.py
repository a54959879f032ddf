"""Run statistics: AOV, Gap, Optimal Rate and the Wilcoxon signed-rank test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

EXACT_MAX_PAIRS = 25
SIGNIFICANCE = 0.05


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int
    method: str

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE


def _exact_p(ranks: np.ndarray, w: float) -> float:
    # ranks are multiples of 1/2, so doubled rank sums are integers
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts += shifted
    w2 = int(round(2 * w))
    values = np.arange(total + 1)
    extreme = (values <= w2) | (values >= total - w2)
    return float(counts[extreme].sum() / 2.0 ** len(ranks))


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> WilcoxonResult:
    """Two-sided paired test on ``x - y``; statistic is ``min(W+, W-)``.

    Zero differences are dropped and tied magnitudes share mean ranks.
    Up to 25 non-zero pairs the p-value is exact (distribution of W+ over
    all sign assignments); above that a normal approximation with tie
    correction is used.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d samples of equal length")
    if len(x) == 0:
        raise ValueError("need at least one pair")
    d = x - y
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return WilcoxonResult(statistic=0.0, p_value=1.0, n=0, method="exact")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    if n <= EXACT_MAX_PAIRS:
        return WilcoxonResult(statistic=w, p_value=min(1.0, _exact_p(ranks, w)), n=n, method="exact")
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts**3 - tie_counts).sum()) / 48.0
    z = (w - n * (n + 1) / 4.0) / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return WilcoxonResult(statistic=w, p_value=min(1.0, p), n=n, method="normal")


def aov(objectives: Sequence[float]) -> float:
    """Average objective value over runs."""
    return float(np.mean(objectives))


def gap(aov_other: float, aov_reference: float) -> float:
    """Relative AOV difference; positive means worse than the reference."""
    return (aov_other - aov_reference) / aov_reference


def optimal_rate(hits: Sequence[bool]) -> float:
    return float(np.mean(np.asarray(hits, dtype=bool))) if len(hits) else math.nan
