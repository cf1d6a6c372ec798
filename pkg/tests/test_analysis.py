import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from kumine.analysis import (BaselineAtCeiling, DimensionMismatch, EmptyInput, LengthMismatch, PartitionError,
                             ShapMatrix, cliffs_delta, dimension_importance, explain, magnitude,
                             normalized_auc_improvement, sampling_shap, scott_knott_esd, tree_shap,
                             wilcoxon_signed_rank)
from kumine.learners import train


# -- Wilcoxon --------------------------------------------------------------------------

def test_wilcoxon_identical_samples():
    res = wilcoxon_signed_rank([0.7, 0.8, 0.9], [0.7, 0.8, 0.9])
    assert res.p_value == 1.0 and res.n_effective == 0


def test_wilcoxon_shifted_n20():
    b = np.linspace(0.5, 0.7, 20)
    res = wilcoxon_signed_rank(b + 100, b)
    assert res.method == "exact" and res.p_value < 0.001
    assert res.p_value == 2 / 2 ** 20


def test_wilcoxon_errors():
    with pytest.raises(LengthMismatch):
        wilcoxon_signed_rank([1, 2], [1])
    with pytest.raises(EmptyInput):
        wilcoxon_signed_rank([], [])


def _enumerated_p(d):
    """Two-sided exact p by enumerating all sign assignments of the midranks."""
    d = [x for x in d if x != 0]
    ranks = sps.rankdata(np.abs(d))
    observed = sum(r for r, x in zip(ranks, d) if x > 0)
    total = ranks.sum()
    dev = abs(observed - total / 2)
    hits = sum(1 for signs in itertools.product([0, 1], repeat=len(d))
               if abs(sum(r for r, s in zip(ranks, signs) if s) - total / 2) >= dev - 1e-9)
    return min(1.0, hits / 2 ** len(d))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=10))
def test_wilcoxon_exact_matches_enumeration(diffs):
    res = wilcoxon_signed_rank(diffs, [0] * len(diffs))
    if not any(diffs):
        assert res.p_value == 1.0
    else:
        assert res.p_value == pytest.approx(_enumerated_p(diffs), abs=1e-12)


def test_wilcoxon_large_sample_normal_approximation():
    rng = np.random.default_rng(0)
    a, b = rng.normal(0.1, 1, 60), rng.normal(0, 1, 60)
    res = wilcoxon_signed_rank(a, b)
    ref = sps.wilcoxon(a, b, method="approx", correction=False)
    assert res.method == "normal" and res.p_value == pytest.approx(ref.pvalue, rel=1e-9)


# -- Cliff's delta ---------------------------------------------------------------------

def test_cliffs_examples():
    assert cliffs_delta([1, 2, 3], [3, 2, 1]).d == 0 and cliffs_delta([1, 2, 3], [3, 2, 1]).magnitude == "negligible"
    big = cliffs_delta([5, 6], [1, 2])
    assert big.d == 1 and big.magnitude == "large"
    small = cliffs_delta([1, 2], [1, 3])
    assert small.d == -0.25 and small.magnitude == "small"


def test_magnitude_bands():
    assert [magnitude(x) for x in (0.1, 0.147, 0.2, 0.33, 0.4, 0.474, 0.5)] == \
        ["negligible", "negligible", "small", "small", "medium", "medium", "large"]
    assert magnitude(-0.5) == "large"


def test_cliffs_antisymmetric():
    rng = np.random.default_rng(1)
    a, b = rng.integers(0, 5, 9), rng.integers(0, 5, 7)
    assert cliffs_delta(a, b).d == -cliffs_delta(b, a).d


# -- normalized AUC improvement --------------------------------------------------------

def test_improvement_examples():
    assert normalized_auc_improvement(0.81, 0.75) == 24.0
    assert normalized_auc_improvement(0.6, 0.6) == 0.0
    assert normalized_auc_improvement(0.70, 0.80) == -50.0
    with pytest.raises(BaselineAtCeiling):
        normalized_auc_improvement(1.0, 1.0)


def test_improvement_paired_lists_average_per_repetition():
    got = normalized_auc_improvement([0.81, 0.9], [0.75, 0.8])
    assert got == pytest.approx((24.0 + 50.0) / 2)


# -- Scott-Knott ESD -------------------------------------------------------------------

def test_skesd_identical_treatments_share_rank():
    table = scott_knott_esd({"a": [0.5] * 10, "b": [0.5] * 10, "c": [0.5] * 10})
    assert set(table.ranks.values()) == {1}


def test_skesd_disjoint_supports():
    table = scott_knott_esd({"low": list(range(1, 101)), "high": list(range(201, 301))})
    assert table.ranks == {"high": 1, "low": 2}


def test_skesd_one_strong_two_similar():
    rng = np.random.default_rng(3)
    table = scott_knott_esd({"A": rng.normal(10, 1, 50), "B": rng.normal(2, 1, 50), "B2": rng.normal(2, 1, 50)})
    assert table.ranks["A"] == 1 and table.ranks["B"] == table.ranks["B2"] == 2
    assert table.groups() == [["A"], sorted(["B", "B2"], key=lambda k: -table.medians[k])]


def test_skesd_negligible_difference_merges():
    rng = np.random.default_rng(4)
    x = rng.normal(0, 1, 2000)
    # significant with n=2000 but |d| below the negligible cut-off
    table = scott_knott_esd({"a": x + 0.1, "b": x})
    assert abs(cliffs_delta(x + 0.1, x).d) < 0.147
    assert table.ranks == {"a": 1, "b": 1}


# -- SHAP ------------------------------------------------------------------------------

def _stump_model():
    # f1 < 0.5: 50 rows with 10 positives (0.2); f1 >= 0.5: 50 rows with 40 positives (0.8)
    f1 = np.r_[np.zeros(50), np.ones(50)]
    y = np.r_[np.r_[np.ones(10), np.zeros(40)], np.r_[np.ones(40), np.zeros(10)]].astype(int)
    f2 = np.tile([0.0, 1.0], 50)
    return train("DT", {"max_depth": 1}, np.column_stack([f1, f2]), y, seed=0)


def test_stump_example():
    model = _stump_model()
    shap = tree_shap(model, np.array([[1.0, 0.0]]), ["f1", "f2"])
    assert shap.base_value == pytest.approx(0.5, abs=1e-12)
    assert shap.values[0, 0] == pytest.approx(0.3, abs=1e-12)
    assert shap.values[0, 1] == 0.0


def _cond_expectation(tree, x, subset, node=0):
    """Path-dependent E[f | x_S] by recursion over the fitted tree."""
    t = tree.tree_
    if t.children_left[node] == -1:
        v = t.value[node][0]
        return v[1] / v.sum()
    f = t.feature[node]
    left, right = t.children_left[node], t.children_right[node]
    if f in subset:
        nxt = left if np.float32(x[f]) <= t.threshold[node] else right
        return _cond_expectation(tree, x, subset, nxt)
    w = t.weighted_n_node_samples
    return (w[left] * _cond_expectation(tree, x, subset, left)
            + w[right] * _cond_expectation(tree, x, subset, right)) / w[node]


def _exact_shapley(tree, x, m):
    phi = np.zeros(m)
    for i in range(m):
        others = [j for j in range(m) if j != i]
        for k in range(m):
            for s in itertools.combinations(others, k):
                weight = math.factorial(k) * math.factorial(m - k - 1) / math.factorial(m)
                phi[i] += weight * (_cond_expectation(tree, x, set(s) | {i}) - _cond_expectation(tree, x, set(s)))
    return phi


def test_tree_shap_matches_enumeration_on_small_trees():
    rng = np.random.default_rng(5)
    X = rng.integers(0, 4, size=(120, 4)).astype(float)
    y = ((X[:, 0] + X[:, 1] * X[:, 2] + rng.normal(0, 1, 120)) > 4).astype(int)
    model = train("DT", {"max_depth": 4}, X, y, seed=1)
    shap = tree_shap(model, X[:10])
    for r in range(10):
        assert np.allclose(shap.values[r], _exact_shapley(model.estimator, X[r], 4), atol=1e-12)


def test_forest_local_accuracy_and_missingness():
    rng = np.random.default_rng(6)
    X = np.column_stack([rng.normal(size=(150, 3)), np.zeros(150)])
    y = (X[:, 0] + 0.5 * rng.normal(size=150) > 0).astype(int)
    model = train("RF", {"n_estimators": 30}, X, y, seed=2)
    shap = tree_shap(model, X)
    assert np.max(np.abs(shap.totals() - model.predict_proba(X))) < 1e-9
    assert np.all(shap.values[:, 3] == 0)


def test_gbt_attributions_are_in_margin_space():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(120, 3))
    y = (X[:, 1] > 0).astype(int)
    model = train("GBT", {"n_estimators": 20, "max_depth": 3}, X, y, seed=3)
    shap = tree_shap(model, X)
    assert shap.space == "margin"
    assert np.allclose(shap.totals(), model.estimator.decision_function(X), atol=1e-9)


def test_sampling_shap_is_exact_for_few_features():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] > 0).astype(int)
    model = train("NB", None, X, y)
    shap = explain(model, X[:5], background=X[:20])
    assert np.allclose(shap.totals(), model.predict_proba(X[:5]), atol=1e-9)
    again = sampling_shap(model, X[:5], X[:20])
    assert np.array_equal(again.values, shap.values)


def test_shap_dimension_mismatch():
    model = _stump_model()
    with pytest.raises(DimensionMismatch):
        tree_shap(model, np.zeros((2, 3)))


# -- dimension importance --------------------------------------------------------------

def test_single_dimension_sums_absolute_values():
    shap = ShapMatrix(np.array([[0.1, -0.2], [0.0, 0.3]]), 0.5, ["a", "b"])
    dists, table = dimension_importance(shap, {"ALL": ["a", "b"]})
    assert np.allclose(dists["ALL"], [0.3, 0.3])
    assert table.ranks == {"ALL": 1}


def test_empty_dimension_is_zero_and_partition_checked():
    shap = ShapMatrix(np.array([[0.1, -0.2], [0.0, 0.3]]), 0.5, ["a", "b"])
    dists, _ = dimension_importance(shap, {"D1": ["a", "b"], "GONE": []})
    assert np.all(dists["GONE"] == 0)
    with pytest.raises(PartitionError):
        dimension_importance(shap, {"D1": ["a"]})


def test_driving_dimension_ranks_first():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(300, 6))
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    model = train("RF", {"n_estimators": 40}, X, y, seed=4)
    cols = [f"c{i}" for i in range(6)]
    shap = tree_shap(model, X, cols)
    _, table = dimension_importance(shap, {"D": cols[:2], "E": cols[2:4], "F": cols[4:]})
    assert table.ranks["D"] == 1 and table.ranks["E"] > 1 and table.ranks["F"] > 1
