"""Paired significance, effect size and normalised AUC improvement."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from decimal import Decimal

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 25
NEGLIGIBLE, SMALL, MEDIUM = 0.147, 0.33, 0.474


class LengthMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class BaselineAtCeiling(ValueError):
    pass


@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    statistic: float
    n_effective: int
    method: str
    zero_method: str = "drop"


def _exact_upper_tail(doubled_ranks: np.ndarray, w2: int) -> tuple[float, float]:
    """P(W <= w) and P(W >= w) under the sign-flip null; ranks are doubled to stay integral."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks.astype(int):
        shifted = counts.copy()
        shifted[r:] += counts[:-r]
        counts = shifted
    counts /= counts.sum()
    return float(counts[: w2 + 1].sum()), float(counts[w2:].sum())


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"paired samples differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise EmptyInput("wilcoxon needs at least one pair")
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        return WilcoxonResult(1.0, 0.0, 0, "all-zero")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_N:
        doubled = np.rint(ranks * 2).astype(int)
        lo, hi = _exact_upper_tail(doubled, int(round(w_plus * 2)))
        p = min(1.0, 2 * min(lo, hi))
        return WilcoxonResult(p, w_plus, n, "exact")
    mean = n * (n + 1) / 4
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - (tie_counts ** 3 - tie_counts).sum() / 48
    if var <= 0:
        return WilcoxonResult(1.0, w_plus, n, "normal")
    z = (w_plus - mean) / math.sqrt(var)
    return WilcoxonResult(float(min(1.0, 2 * norm.sf(abs(z)))), w_plus, n, "normal")


@dataclass(frozen=True)
class EffectSize:
    d: float
    magnitude: str


def magnitude(d: float) -> str:
    m = abs(d)
    if m <= NEGLIGIBLE:
        return "negligible"
    if m <= SMALL:
        return "small"
    if m <= MEDIUM:
        return "medium"
    return "large"


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> EffectSize:
    a = np.asarray(a, dtype=float)
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptyInput("Cliff's delta needs two non-empty samples")
    below = np.searchsorted(b, a, side="left")        # b strictly less than each a
    above = b.size - np.searchsorted(b, a, side="right")
    d = (int(below.sum()) - int(above.sum())) / (a.size * b.size)
    return EffectSize(d, magnitude(d))


def _improvement(model: float, baseline: float) -> float:
    # decimal arithmetic on the shortest repr keeps e.g. (0.81, 0.75) at exactly 24
    m, base = Decimal(repr(float(model))), Decimal(repr(float(baseline)))
    if base >= 1:
        raise BaselineAtCeiling("baseline AUC is 1; improvement is undefined")
    return float((m - base) / (1 - base) * 100)


def normalized_auc_improvement(model_auc, baseline_auc) -> float:
    """Percent of the remaining headroom gained over the baseline.

    Paired lists give the mean of the per-repetition improvements.
    """
    if np.ndim(model_auc) == 0 and np.ndim(baseline_auc) == 0:
        return _improvement(model_auc, baseline_auc)
    m = np.atleast_1d(np.asarray(model_auc, dtype=float))
    base = np.atleast_1d(np.asarray(baseline_auc, dtype=float))
    if m.shape != base.shape:
        raise LengthMismatch("paired AUC lists differ in length")
    if m.size == 0:
        raise EmptyInput("no AUC values")
    return float(np.mean([_improvement(x, y) for x, y in zip(m, base)]))
