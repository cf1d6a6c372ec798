"""Paired out-of-sample evaluation of several feature sets on one bootstrap plan."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .bootstrap import BootstrapPlan
from .metrics import auc
from .models import train


def repetition_seed(plan: BootstrapPlan, i: int) -> int:
    return int(np.random.SeedSequence([plan.seed, i]).generate_state(1)[0])


def run_experiment(matrices: Mapping[str, np.ndarray], labels, plan: BootstrapPlan, kind: str = "RF",
                   params: Mapping | None = None) -> dict[str, list[float]]:
    """AUC of every named feature set on each split of ``plan``.

    Every model sees the identical i-th split and the identical i-th training seed,
    so the lists are paired by repetition.
    """
    y = np.asarray(labels).astype(int)
    for name, X in matrices.items():
        if np.asarray(X).shape[0] != len(y):
            raise ValueError(f"feature set {name!r} has {np.asarray(X).shape[0]} rows, labels have {len(y)}")
        if len(y) != plan.n:
            raise ValueError("plan size does not match the number of rows")
    out: dict[str, list[float]] = {}
    for name in matrices:
        X = np.asarray(matrices[name], dtype=float)
        scores = []
        for i, split in enumerate(plan.splits):
            model = train(kind, params, X[split.in_sample], y[split.in_sample], repetition_seed(plan, i))
            scores.append(auc(model.predict_proba(X[split.out_of_sample]), y[split.out_of_sample]))
        out[name] = scores
    return out
