"""Classifier zoo, probability prediction and grid search.

Estimators come from scikit-learn. The random forest prediction is computed here
as the plain mean of per-tree class-1 probabilities so the averaging law holds
exactly and tree attributions can be summed against it.
"""

from __future__ import annotations

import itertools
import pickle
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.ensemble import GradientBoostingClassifier, RandomForestClassifier
from sklearn.model_selection import StratifiedKFold
from sklearn.naive_bayes import GaussianNB
from sklearn.neighbors import KNeighborsClassifier
from sklearn.tree import DecisionTreeClassifier

from .metrics import auc

KINDS = ("RF", "DT", "KNN", "NB", "GBT")

RF_DEFAULTS = {"n_estimators": 100, "max_depth": None, "criterion": "gini",
               "max_features": "sqrt", "min_samples_split": 2, "bootstrap": True}


class SingleClassTraining(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


def _seed(seed: int) -> int:
    return int(seed) % (2 ** 32)


def _build(kind: str, params: Mapping, n_train: int, seed: int):
    p = dict(params)
    if kind == "RF":
        cfg = {**RF_DEFAULTS, **p}
        return RandomForestClassifier(**cfg, random_state=_seed(seed))
    if kind == "DT":
        return DecisionTreeClassifier(criterion=p.get("criterion", "gini"), max_depth=p.get("max_depth"),
                                      ccp_alpha=p.get("ccp_alpha", 0.0), random_state=_seed(seed))
    if kind == "KNN":
        # a fold can hold fewer rows than the requested neighbourhood
        return KNeighborsClassifier(n_neighbors=max(1, min(int(p.get("n_neighbors", 5)), n_train)))
    if kind == "NB":
        return GaussianNB(var_smoothing=p.get("var_smoothing", 1e-9))
    if kind == "GBT":
        leaves = p.get("num_leaves", None)
        depth = p.get("max_depth", 3 if "num_leaves" not in p else None)
        return GradientBoostingClassifier(n_estimators=p.get("n_estimators", 100), max_depth=depth,
                                          max_leaf_nodes=leaves, learning_rate=p.get("learning_rate", 0.1),
                                          random_state=_seed(seed))
    raise ValueError(f"unknown classifier kind {kind!r}; expected one of {', '.join(KINDS)}")


@dataclass(frozen=True)
class Model:
    kind: str
    params: dict
    estimator: object = field(repr=False)
    n_features: int
    seed: int

    def predict_proba(self, X) -> np.ndarray:
        """Probability of class 1 for each row."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if self.kind == "RF":
            return np.mean(self.tree_probabilities(X), axis=0)
        return self.estimator.predict_proba(X)[:, 1]

    def tree_probabilities(self, X) -> np.ndarray:
        """Per-tree class-1 probabilities, shape (n_trees, n_rows). Forests only."""
        if self.kind != "RF":
            raise TypeError("per-tree probabilities exist for forests only")
        return np.stack([t.predict_proba(X)[:, 1] for t in self.estimator.estimators_])

    def save(self, directory: str | Path) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "model.pkl", "wb") as fh:
            pickle.dump(self, fh, protocol=4)

    @staticmethod
    def load(directory: str | Path) -> Model:
        with open(Path(directory) / "model.pkl", "rb") as fh:
            return pickle.load(fh)


def train(kind: str, params: Mapping | None, X, y, seed: int = 0) -> Model:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training matrix is empty")
    if len(np.unique(y)) < 2:
        raise SingleClassTraining("training labels hold a single class")
    est = _build(kind, params or {}, X.shape[0], seed)
    est.fit(X, y)
    if kind == "NB" and est.epsilon_ == 0:
        # sklearn scales the smoothing by the largest feature variance, which is 0 on constant data
        est.epsilon_ = est.var_smoothing
        est.var_ = est.var_ + est.epsilon_
    return Model(kind, dict(params or {}), est, X.shape[1], seed)


@dataclass(frozen=True)
class GridSpec:
    kind: str
    grid: Mapping[str, Sequence]
    folds: int = 10
    name: str = ""

    def points(self) -> list[dict]:
        names = list(self.grid)
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.grid[n] for n in names))]


N_ESTIMATORS = (10, 50, 100, 200)
DEPTHS = (None, 5, 10)
LEARNING_RATES = (0.1, 0.01, 0.001)

GRIDS = {
    "KNN": GridSpec("KNN", {"n_neighbors": (1, 5, 9, 13, 17, 20)}, name="KNN"),
    "NB": GridSpec("NB", {"var_smoothing": (1e-5, 1e-9, 1e-11, 1e-15)}, name="NB"),
    "DT": GridSpec("DT", {"criterion": ("gini", "entropy", "log_loss"), "max_depth": DEPTHS,
                          "ccp_alpha": (0.0001, 0.001, 0.01, 0.1, 0.5)}, name="DT"),
    "RF": GridSpec("RF", {"n_estimators": N_ESTIMATORS, "max_depth": DEPTHS}, name="RF"),
    "XGB": GridSpec("GBT", {"n_estimators": N_ESTIMATORS, "max_depth": DEPTHS,
                            "learning_rate": LEARNING_RATES}, name="XGB"),
    "LGBM": GridSpec("GBT", {"n_estimators": N_ESTIMATORS, "num_leaves": DEPTHS,
                             "learning_rate": LEARNING_RATES}, name="LGBM"),
}


def cross_val_auc(kind: str, params: Mapping, X, y, folds: int, seed: int) -> float:
    skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=_seed(seed))
    scores = []
    for tr, te in skf.split(X, y):
        model = train(kind, params, X[tr], y[tr], seed)
        scores.append(auc(model.predict_proba(X[te]), y[te]))
    return float(np.mean(scores))


def grid_search(spec: GridSpec, X, y, seed: int = 0) -> tuple[dict, float]:
    """Exhaustive stratified k-fold search scored by mean fold AUC; ties go to the earlier point."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    counts = np.bincount(y, minlength=2)
    if len(y) < spec.folds or counts.min() < spec.folds:
        raise TooFewSamples(f"{spec.folds}-fold stratified search needs {spec.folds} rows of each class, "
                            f"got {counts.tolist()}")
    best, best_score = None, -np.inf
    for point in spec.points():
        score = cross_val_auc(spec.kind, point, X, y, spec.folds, seed)
        if score > best_score:
            best, best_score = point, score
    return best, best_score
