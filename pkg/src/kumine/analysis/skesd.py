"""Scott-Knott ESD style ranking of distributions."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.stats import mannwhitneyu, rankdata

from .stats import EmptyInput, cliffs_delta


@dataclass(frozen=True)
class RankTable:
    ranks: dict[str, int]
    order: tuple[str, ...]
    medians: dict[str, float]

    def groups(self) -> list[list[str]]:
        out: dict[int, list[str]] = {}
        for name in self.order:
            out.setdefault(self.ranks[name], []).append(name)
        return [out[r] for r in sorted(out)]

    def to_json(self) -> dict:
        return {"version": 1, "order": list(self.order), "ranks": dict(self.ranks),
                "medians": dict(self.medians)}


def _distinct(left: np.ndarray, right: np.ndarray, alpha: float, negligible: float) -> bool:
    if np.all(left == left[0]) and np.all(right == left[0]):
        return False
    p = mannwhitneyu(left, right, alternative="two-sided").pvalue
    return bool(p <= alpha and abs(cliffs_delta(left, right).d) > negligible)


def _best_split(values: Sequence[np.ndarray]) -> int:
    """Index k splitting ``values`` into [:k] and [k:] with the largest between-group rank variance."""
    pooled = np.concatenate(values)
    ranks = rankdata(pooled)
    sizes = np.array([len(v) for v in values])
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    grand = ranks.mean()
    best_k, best_ss = 1, -np.inf
    for k in range(1, len(values)):
        left, right = ranks[: bounds[k]], ranks[bounds[k]:]
        ss = left.size * (left.mean() - grand) ** 2 + right.size * (right.mean() - grand) ** 2
        if ss > best_ss + 1e-12:
            best_k, best_ss = k, ss
    return best_k


def scott_knott_esd(treatments: Mapping[str, Sequence[float]], alpha: float = 0.05,
                    negligible: float = 0.147) -> RankTable:
    """Rank treatments (1 = best, highest median) into statistically distinct groups.

    A split between two contiguous groups is kept only when a two-sided Mann-Whitney
    test rejects at ``alpha`` and the absolute Cliff's delta exceeds ``negligible``.
    """
    data = {name: np.asarray(v, dtype=float) for name, v in treatments.items()}
    for name, v in data.items():
        if v.size == 0:
            raise EmptyInput(f"treatment {name!r} is empty")
    if not data:
        return RankTable({}, (), {})
    medians = {name: float(np.median(v)) for name, v in data.items()}
    names = list(data)
    # highest median first; ties keep the input order
    order = sorted(names, key=lambda n: (-medians[n], names.index(n)))

    groups: list[list[str]] = []

    def partition(members: list[str]) -> None:
        if len(members) == 1:
            groups.append(members)
            return
        k = _best_split([data[m] for m in members])
        left = np.concatenate([data[m] for m in members[:k]])
        right = np.concatenate([data[m] for m in members[k:]])
        if _distinct(left, right, alpha, negligible):
            partition(members[:k])
            partition(members[k:])
        else:
            groups.append(members)

    partition(order)
    ranks = {m: i + 1 for i, g in enumerate(groups) for m in g}
    return RankTable(ranks, tuple(order), medians)
