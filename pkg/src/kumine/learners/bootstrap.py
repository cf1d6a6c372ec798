"""Out-of-sample bootstrap splits."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np


class DegenerateSplit(RuntimeError):
    pass


@dataclass(frozen=True)
class Split:
    in_sample: np.ndarray
    out_of_sample: np.ndarray


@dataclass(frozen=True)
class BootstrapPlan:
    n: int
    repetitions: int
    seed: int
    splits: tuple[Split, ...]

    def __iter__(self):
        return iter(self.splits)

    def __len__(self):
        return len(self.splits)


def bootstrap_plan(n: int, repetitions: int = 100, seed: int = 0,
                   labels: Sequence[int] | None = None, max_retries: int = 1000) -> BootstrapPlan:
    """Draw ``repetitions`` splits of ``n`` rows.

    With ``labels`` given, a draw whose in-sample holds a single class, or whose
    out-of-sample holds a single class, is redrawn so both training and AUC stay defined.
    """
    if n < 2:
        raise ValueError("bootstrap needs at least two rows")
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    y = None if labels is None else np.asarray(labels).astype(int)
    if y is not None and len(y) != n:
        raise ValueError("labels length must equal n")
    rng = np.random.default_rng(seed)
    splits = []
    for _ in range(repetitions):
        for _attempt in range(max_retries):
            ins = rng.integers(0, n, size=n)
            mask = np.ones(n, dtype=bool)
            mask[ins] = False
            oos = np.flatnonzero(mask)
            if oos.size == 0:
                continue
            if y is not None and (len(np.unique(y[ins])) < 2 or len(np.unique(y[oos])) < 2):
                continue
            splits.append(Split(ins, oos))
            break
        else:
            raise DegenerateSplit(f"no usable split after {max_retries} draws")
    return BootstrapPlan(n, repetitions, seed, tuple(splits))
