"""Long-time-contributor labels."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import timedelta

from .mining.records import CommitRecord, DevProjectPair

SETTINGS = {1: "LTC-1", 2: "LTC-2", 3: "LTC-3"}


@dataclass(frozen=True)
class YearWindow:
    index: int
    dev_commits: int
    threshold: float
    n_others: int

    @property
    def passed(self) -> bool:
        return self.dev_commits > self.threshold


@dataclass(frozen=True)
class LtcLabel:
    setting: str
    is_ltc: bool
    duration_days: float
    yearly_counts: tuple[YearWindow, ...]
    duration_ok: bool
    percentile: float = 10.0
    year_days: int = 365


def nearest_rank(values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile of ``values``; 0 for an empty sample."""
    if not values:
        return 0
    if not 0 < pct <= 100:
        raise ValueError("percentile must be in (0, 100]")
    ordered = sorted(values)
    rank = max(1, math.ceil(pct / 100 * len(ordered)))
    return ordered[rank - 1]


def label_ltc(pair: DevProjectPair, project_commits: Iterable[CommitRecord], years: int,
              percentile: float = 10.0, year_days: int = 365) -> LtcLabel:
    if years not in SETTINGS:
        raise ValueError(f"T must be one of {sorted(SETTINGS)}, got {years}")
    commits = list(project_commits)
    author = pair.author_name
    mine = [c.author_time for c in commits if c.author_name == author]
    start = pair.initial_commit.author_time
    if mine:
        first, last = min(mine), max(mine)
    else:
        first = last = start
    duration = (last - first).total_seconds() / 86400
    duration_ok = duration > years * year_days

    windows = []
    year = timedelta(days=year_days)
    for k in range(1, years + 1):
        lo, hi = start + (k - 1) * year, start + k * year
        counts = Counter(c.author_name for c in commits if lo <= c.author_time < hi)
        dev = counts.pop(author, 0)
        others = [n for n in counts.values() if n > 0]
        windows.append(YearWindow(k, dev, nearest_rank(others, percentile), len(others)))
    is_ltc = duration_ok and all(w.passed for w in windows)
    return LtcLabel(SETTINGS[years], is_ltc, duration, tuple(windows), duration_ok, percentile, year_days)
