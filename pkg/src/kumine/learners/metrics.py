from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


class SingleClassEval(ValueError):
    pass


def auc(scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic, ties counting half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassEval("AUC needs both classes")
    ranks = rankdata(s)
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))
