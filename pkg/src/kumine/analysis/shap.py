"""Shapley attributions.

Tree models use the polynomial-time path-dependent TreeSHAP recursion over the
fitted scikit-learn tree arrays, with node training covers as the reference
distribution. Forests average per-tree attributions; gradient boosting sums
them in margin (log-odds) space. KNN and naive Bayes fall back to Shapley
values of an interventional value function over a background sample, exact up
to 15 features and permutation-sampled beyond.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numba
import numpy as np

from ..learners.models import Model

EXACT_MAX_FEATURES = 15


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ShapMatrix:
    values: np.ndarray          # (records, features)
    base_value: float
    columns: tuple[str, ...]
    space: str = "probability"  # or "margin"
    standard_error: np.ndarray | None = None

    def totals(self) -> np.ndarray:
        return self.base_value + self.values.sum(axis=1)


@dataclass(frozen=True)
class TreeArrays:
    left: np.ndarray
    right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray
    cover: np.ndarray
    max_depth: int

    def expected_value(self) -> float:
        return _expected_value(self.left, self.right, self.value, self.cover)


def _expected_value(left, right, value, cover) -> float:
    memo = np.array(value, dtype=float)
    # children always have larger indices than their parent in sklearn's layout
    for node in range(len(left) - 1, -1, -1):
        if left[node] >= 0:
            l, r = left[node], right[node]
            memo[node] = (cover[l] * memo[l] + cover[r] * memo[r]) / (cover[l] + cover[r])
    return float(memo[0])


def tree_arrays(tree, output: str = "proba") -> TreeArrays:
    """Flatten a fitted sklearn tree. ``output='proba'`` reads the class-1 share, ``'raw'`` the leaf value."""
    t = tree.tree_
    if output == "proba":
        v = t.value[:, 0, :]
        value = v[:, 1] / v.sum(axis=1) if v.shape[1] > 1 else np.zeros(v.shape[0])
    else:
        value = t.value[:, 0, 0]
    return TreeArrays(t.children_left.astype(np.int64), t.children_right.astype(np.int64),
                      t.feature.astype(np.int64), t.threshold.astype(np.float64),
                      np.ascontiguousarray(value, dtype=np.float64),
                      t.weighted_n_node_samples.astype(np.float64), int(t.max_depth))


@numba.njit(cache=True)
def _extend(feat, zero, one, pw, l, pz, po, pi):
    feat[l] = pi
    zero[l] = pz
    one[l] = po
    pw[l] = 1.0 if l == 0 else 0.0
    for i in range(l - 1, -1, -1):
        pw[i + 1] += po * pw[i] * (i + 1) / (l + 1)
        pw[i] = pz * pw[i] * (l - i) / (l + 1)


@numba.njit(cache=True)
def _unwind(feat, zero, one, pw, l, i):
    o = one[i]
    z = zero[i]
    n = pw[l]
    for j in range(l - 1, -1, -1):
        if o != 0:
            t = pw[j]
            pw[j] = n * (l + 1) / ((j + 1) * o)
            n = t - pw[j] * z * (l - j) / (l + 1)
        else:
            pw[j] = pw[j] * (l + 1) / (z * (l - j))
    for j in range(i, l):
        feat[j] = feat[j + 1]
        zero[j] = zero[j + 1]
        one[j] = one[j + 1]


@numba.njit(cache=True)
def _unwound_sum(zero, one, pw, l, i):
    o = one[i]
    z = zero[i]
    n = pw[l]
    total = 0.0
    for j in range(l - 1, -1, -1):
        if o != 0:
            t = n * (l + 1) / ((j + 1) * o)
            total += t
            n = pw[j] - t * z * (l - j) / (l + 1)
        else:
            total += (pw[j] / z) / ((l - j) / (l + 1))
    return total


@numba.njit(cache=True)
def _tree_shap_rows(left, right, feature, threshold, value, cover, max_depth, X, phi):
    width = max_depth + 2
    levels = max_depth + 2
    feat = np.empty((levels, width), dtype=np.int64)
    zero = np.empty((levels, width))
    one = np.empty((levels, width))
    pw = np.empty((levels, width))
    # explicit stack: node, level, parent unique depth, zero fraction, one fraction, feature
    s_node = np.empty(2 * levels + 2, dtype=np.int64)
    s_level = np.empty(2 * levels + 2, dtype=np.int64)
    s_depth = np.empty(2 * levels + 2, dtype=np.int64)
    s_pz = np.empty(2 * levels + 2)
    s_po = np.empty(2 * levels + 2)
    s_pi = np.empty(2 * levels + 2, dtype=np.int64)
    for row in range(X.shape[0]):
        x = X[row]
        top = 0
        s_node[0] = 0
        s_level[0] = 0
        s_depth[0] = 0
        s_pz[0] = 1.0
        s_po[0] = 1.0
        s_pi[0] = -1
        while top >= 0:
            node = s_node[top]
            lev = s_level[top]
            l = s_depth[top]
            pz = s_pz[top]
            po = s_po[top]
            pi = s_pi[top]
            top -= 1
            if lev > 0:
                for k in range(l):
                    feat[lev, k] = feat[lev - 1, k]
                    zero[lev, k] = zero[lev - 1, k]
                    one[lev, k] = one[lev - 1, k]
                    pw[lev, k] = pw[lev - 1, k]
            _extend(feat[lev], zero[lev], one[lev], pw[lev], l, pz, po, pi)
            if left[node] < 0:
                for i in range(1, l + 1):
                    w = _unwound_sum(zero[lev], one[lev], pw[lev], l, i)
                    phi[row, feat[lev, i]] += w * (one[lev, i] - zero[lev, i]) * value[node]
                continue
            f = feature[node]
            if x[f] <= threshold[node]:
                hot = left[node]
                cold = right[node]
            else:
                hot = right[node]
                cold = left[node]
            iz = 1.0
            io = 1.0
            k = 1
            while k <= l:
                if feat[lev, k] == f:
                    break
                k += 1
            if k <= l:
                iz = zero[lev, k]
                io = one[lev, k]
                _unwind(feat[lev], zero[lev], one[lev], pw[lev], l, k)
                l -= 1
            rj = cover[node]
            # cold child pushed first so the hot branch is processed first
            top += 1
            s_node[top] = cold
            s_level[top] = lev + 1
            s_depth[top] = l + 1
            s_pz[top] = iz * cover[cold] / rj
            s_po[top] = 0.0
            s_pi[top] = f
            top += 1
            s_node[top] = hot
            s_level[top] = lev + 1
            s_depth[top] = l + 1
            s_pz[top] = iz * cover[hot] / rj
            s_po[top] = io
            s_pi[top] = f


def tree_shap_single(arrays: TreeArrays, X: np.ndarray) -> tuple[np.ndarray, float]:
    X = np.ascontiguousarray(X, dtype=np.float64)
    phi = np.zeros(X.shape, dtype=np.float64)
    _tree_shap_rows(arrays.left, arrays.right, arrays.feature, arrays.threshold, arrays.value,
                    arrays.cover, arrays.max_depth, X, phi)
    return phi, arrays.expected_value()


def _as_tree_input(X) -> np.ndarray:
    # sklearn trees compare float32 copies of the inputs against their thresholds
    return np.asarray(X, dtype=np.float32).astype(np.float64)


def tree_shap(model: Model, X, columns: Sequence[str] | None = None) -> ShapMatrix:
    """Attributions for a forest, single tree or gradient-boosted model."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {X.shape[1]}")
    cols = tuple(columns) if columns is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    Xt = _as_tree_input(X)
    est = model.estimator
    if model.kind == "RF":
        trees = est.estimators_
        phi = np.zeros_like(Xt)
        base = 0.0
        for t in trees:
            p, e = tree_shap_single(tree_arrays(t), Xt)
            phi += p
            base += e
        return ShapMatrix(phi / len(trees), base / len(trees), cols)
    if model.kind == "DT":
        phi, base = tree_shap_single(tree_arrays(est), Xt)
        return ShapMatrix(phi, base, cols)
    if model.kind == "GBT":
        lr = est.learning_rate
        phi = np.zeros_like(Xt)
        tree_base = 0.0
        tree_pred = np.zeros(Xt.shape[0])
        for t in est.estimators_[:, 0]:
            arrays = tree_arrays(t, output="raw")
            p, e = tree_shap_single(arrays, Xt)
            phi += lr * p
            tree_base += lr * e
            tree_pred += lr * t.predict(X)
        init = float((est.decision_function(X[:1]) - tree_pred[:1])[0])
        return ShapMatrix(phi, init + tree_base, cols, space="margin")
    raise TypeError(f"tree attributions are not defined for {model.kind} models")


def _coalition_value(model: Model, x: np.ndarray, background: np.ndarray, mask: np.ndarray) -> float:
    data = background.copy()
    data[:, mask] = x[mask]
    return float(model.predict_proba(data).mean())


def sampling_shap(model: Model, X, background, columns: Sequence[str] | None = None,
                  n_permutations: int = 200, seed: int = 0) -> ShapMatrix:
    """Shapley values of f(x_S, background_rest) averaged over the background rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    bg = np.asarray(background, dtype=float)
    if X.shape[1] != model.n_features or bg.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features")
    p = X.shape[1]
    cols = tuple(columns) if columns is not None else tuple(f"f{i}" for i in range(p))
    base = float(model.predict_proba(bg).mean())
    phi = np.zeros_like(X)
    se = np.zeros_like(X)
    if p <= EXACT_MAX_FEATURES:
        weights = [math.factorial(k) * math.factorial(p - k - 1) / math.factorial(p) for k in range(p)]
        for r, x in enumerate(X):
            cache: dict[tuple[int, ...], float] = {}

            def v(subset: tuple[int, ...]) -> float:
                if subset not in cache:
                    mask = np.zeros(p, dtype=bool)
                    mask[list(subset)] = True
                    cache[subset] = _coalition_value(model, x, bg, mask)
                return cache[subset]

            for j in range(p):
                rest = [i for i in range(p) if i != j]
                for k in range(p):
                    for subset in itertools.combinations(rest, k):
                        with_j = tuple(sorted((*subset, j)))
                        phi[r, j] += weights[k] * (v(with_j) - v(subset))
        return ShapMatrix(phi, base, cols)
    rng = np.random.default_rng(seed)
    for r, x in enumerate(X):
        draws = np.zeros((n_permutations, p))
        for t in range(n_permutations):
            perm = rng.permutation(p)
            mask = np.zeros(p, dtype=bool)
            prev = base
            for j in perm:
                mask[j] = True
                cur = _coalition_value(model, x, bg, mask)
                draws[t, j] = cur - prev
                prev = cur
        phi[r] = draws.mean(axis=0)
        se[r] = draws.std(axis=0, ddof=1) / math.sqrt(n_permutations)
    return ShapMatrix(phi, base, cols, standard_error=se)


def explain(model: Model, X, columns: Sequence[str] | None = None, background=None,
            seed: int = 0) -> ShapMatrix:
    if model.kind in ("RF", "DT", "GBT"):
        return tree_shap(model, X, columns)
    if background is None:
        raise ValueError(f"{model.kind} attributions need a background sample")
    return sampling_shap(model, X, background, columns, seed=seed)
