"""Correlation and multicollinearity based feature selection (AutoSpearman)."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class SelectionResult:
    kept_columns: list[str]
    dropped: list[tuple[str, str]]
    spearman_threshold: float = 0.7
    vif_threshold: float = 5.0
    vifs: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "version": 1,
            "kept_columns": list(self.kept_columns),
            "dropped": [{"column": c, "reason": r} for c, r in self.dropped],
            "spearman_threshold": self.spearman_threshold,
            "vif_threshold": self.vif_threshold,
            "vifs": {k: (None if not np.isfinite(v) else v) for k, v in self.vifs.items()},
        }

    @classmethod
    def from_json(cls, doc: dict) -> SelectionResult:
        return cls(list(doc["kept_columns"]), [(d["column"], d["reason"]) for d in doc["dropped"]],
                   doc.get("spearman_threshold", 0.7), doc.get("vif_threshold", 5.0),
                   {k: (np.inf if v is None else v) for k, v in doc.get("vifs", {}).items()})


def spearman_matrix(X: np.ndarray) -> np.ndarray:
    """Pairwise Spearman correlation; a constant column correlates 0 with everything."""
    X = np.asarray(X, dtype=float)
    ranks = np.apply_along_axis(rankdata, 0, X) if X.shape[0] else X
    centered = ranks - ranks.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    constant = norms == 0
    norms[constant] = 1.0
    z = centered / norms
    rho = z.T @ z
    rho[constant, :] = 0.0
    rho[:, constant] = 0.0
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)


def vif(X: np.ndarray) -> np.ndarray:
    """Variance inflation factor of each column, regressing it on the others with an intercept.

    Constant columns carry no variance to inflate and get 1.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    out = np.ones(p)
    for j in range(p):
        y = X[:, j]
        ss_tot = ((y - y.mean()) ** 2).sum()
        if ss_tot == 0 or p == 1:
            continue
        others = np.column_stack([np.ones(n), np.delete(X, j, axis=1)])
        coef, *_ = np.linalg.lstsq(others, y, rcond=None)
        ss_res = ((y - others @ coef) ** 2).sum()
        r2 = 1.0 - ss_res / ss_tot
        out[j] = np.inf if r2 >= 1.0 - 1e-10 else 1.0 / (1.0 - r2)
    return out


def autospearman(X: np.ndarray, columns: Sequence[str], spearman_threshold: float = 0.7,
                 vif_threshold: float = 5.0) -> SelectionResult:
    X = np.asarray(X, dtype=float)
    columns = list(columns)
    if X.ndim != 2 or X.shape[1] != len(columns):
        raise ValueError("matrix width must match the column list")
    if len(columns) < 2:
        raise ValueError("autospearman needs at least two columns")

    rho = np.abs(spearman_matrix(X))
    keep = list(range(len(columns)))
    dropped: list[tuple[str, str]] = []

    # stage 1: pairwise correlation
    while len(keep) > 1:
        sub = rho[np.ix_(keep, keep)]
        upper = np.triu(sub, k=1)
        best = upper.max()
        if best < spearman_threshold:
            break
        i, j = (int(v) for v in np.argwhere(upper == best)[0])
        mean_i = (sub[i].sum() - 1.0) / (len(keep) - 1)
        mean_j = (sub[j].sum() - 1.0) / (len(keep) - 1)
        loser, partner = (i, j) if mean_i > mean_j else (j, i)
        dropped.append((columns[keep[loser]], f"correlated-with {columns[keep[partner]]}"))
        del keep[loser]

    # stage 2: variance inflation
    vifs = vif(X[:, keep])
    while len(keep) > 1 and vifs.max() >= vif_threshold:
        worst = int(np.argmax(vifs))
        dropped.append((columns[keep[worst]], "high-VIF"))
        del keep[worst]
        vifs = vif(X[:, keep])
    if len(keep) == 1:
        vifs = np.ones(1)

    kept = [columns[k] for k in keep]
    return SelectionResult(kept, dropped, spearman_threshold, vif_threshold,
                           {c: float(v) for c, v in zip(kept, vifs)})
