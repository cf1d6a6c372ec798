import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kumine.learners import (GRIDS, GridSpec, Model, SelectionResult, SingleClassEval, SingleClassTraining,
                             TooFewSamples, auc, autospearman, bootstrap_plan, grid_search, run_experiment,
                             spearman_matrix, train, vif)


def separable(n=40, seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    X = np.column_stack([y * 10 + rng.normal(0, 1, n), rng.normal(0, 1, n)])
    return X, y


# -- AutoSpearman ----------------------------------------------------------------------

def test_identical_columns_one_dropped():
    rng = np.random.default_rng(1)
    x = rng.normal(size=50)
    res = autospearman(np.column_stack([x, x, rng.normal(size=50)]), ["a", "b", "c"])
    assert len(res.dropped) == 1
    col, reason = res.dropped[0]
    assert col in ("a", "b") and reason.startswith("correlated")


def test_independent_columns_all_kept():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(500, 6))
    rho = np.abs(spearman_matrix(X))
    np.fill_diagonal(rho, 0)
    assert rho.max() < 0.7
    assert autospearman(X, list("abcdef")).kept_columns == list("abcdef")


def test_exact_sum_has_infinite_vif_and_goes():
    rng = np.random.default_rng(3)
    x, y, w = rng.normal(size=(3, 200))
    X = np.column_stack([x, y, x + y, w])
    # least-squares oracle: regress x+y on the others
    A = np.column_stack([np.ones(200), x, y, w])
    resid = (x + y) - A @ np.linalg.lstsq(A, x + y, rcond=None)[0]
    assert np.allclose(resid, 0)
    assert np.isinf(vif(X)[2])
    res = autospearman(X, ["x", "y", "z", "w"])
    assert len(res.kept_columns) == 3
    assert any(r == "high-VIF" for _, r in res.dropped) or any(r.startswith("correlated") for _, r in res.dropped)


def test_selection_json_round_trip():
    rng = np.random.default_rng(4)
    x = rng.normal(size=40)
    res = autospearman(np.column_stack([x, 2 * x, rng.normal(size=40)]), ["a", "b", "c"])
    assert SelectionResult.from_json(res.to_json()) == res


def test_selection_needs_two_columns():
    with pytest.raises(ValueError):
        autospearman(np.zeros((5, 1)), ["a"])


# -- bootstrap -------------------------------------------------------------------------

def test_bootstrap_preconditions_and_determinism():
    with pytest.raises(ValueError):
        bootstrap_plan(1)
    same = lambda a, b: all(np.array_equal(x.in_sample, y.in_sample) for x, y in zip(a.splits, b.splits))  # noqa: E731
    assert same(bootstrap_plan(50, 10, seed=3), bootstrap_plan(50, 10, seed=3))
    assert not same(bootstrap_plan(50, 10, seed=3), bootstrap_plan(50, 10, seed=4))


def test_bootstrap_with_labels_keeps_both_classes():
    y = np.array([1, 1] + [0] * 8)
    plan = bootstrap_plan(10, 30, seed=0, labels=y)
    for s in plan.splits:
        assert len(set(y[s.in_sample])) == 2 and len(set(y[s.out_of_sample])) == 2


def test_bootstrap_oos_fraction_matches_simulation_oracle():
    plan = bootstrap_plan(1000, 100, seed=21)
    rng = np.random.default_rng(99)
    oracle = np.mean([1000 - len(np.unique(rng.integers(0, 1000, 1000))) for _ in range(100)]) / 1000
    got = np.mean([len(s.out_of_sample) for s in plan.splits]) / 1000
    assert abs(got - oracle) < 0.02 and abs(got - 0.368) < 0.02


# -- training --------------------------------------------------------------------------

def test_rf_separable_training_auc_is_one():
    X, y = separable()
    model = train("RF", None, X, y, seed=0)
    assert auc(model.predict_proba(X), y) == 1.0
    assert len(model.estimator.estimators_) == 100


def test_rf_probability_is_mean_of_trees():
    X, y = separable()
    model = train("RF", {"n_estimators": 7}, X, y, seed=1)
    assert np.allclose(model.predict_proba(X), model.tree_probabilities(X).mean(axis=0))


def test_knn_with_all_neighbours_returns_prior():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(20, 3))
    y = np.array([1] * 5 + [0] * 15)
    model = train("KNN", {"n_neighbors": 20}, X, y)
    assert np.allclose(model.predict_proba(rng.normal(size=(4, 3))), 0.25)


def test_nb_zero_variance_is_finite():
    X = np.ones((10, 2))
    y = np.array([0, 1] * 5)
    p = train("NB", {"var_smoothing": 1e-9}, X, y).predict_proba(np.array([[1.0, 1.0], [2.0, 0.5]]))
    assert np.all(np.isfinite(p))


def test_single_class_training_rejected():
    with pytest.raises(SingleClassTraining):
        train("RF", None, np.zeros((4, 2)), np.zeros(4))


def test_model_save_load(tmp_path):
    X, y = separable()
    model = train("DT", {"max_depth": 2}, X, y, seed=2)
    model.save(tmp_path)
    again = Model.load(tmp_path)
    assert np.array_equal(again.predict_proba(X), model.predict_proba(X))


# -- AUC -------------------------------------------------------------------------------

def test_auc_examples():
    assert auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0
    assert auc([0.5] * 4, [1, 0, 1, 0]) == 0.5
    assert auc([0.9, 0.4, 0.5, 0.1], [1, 1, 0, 0]) == 0.75
    with pytest.raises(SingleClassEval):
        auc([0.1, 0.2], [1, 1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=4, max_size=30), st.randoms())
def test_auc_invariant_to_monotone_transform(scores, rnd):
    labels = [i % 2 for i in range(len(scores))]
    rnd.shuffle(labels)
    s = np.array(scores, dtype=float)
    assert auc(s, labels) == auc(s ** 3 + 7, labels)
    assert abs(auc(s, labels) + auc(-s, labels) - 1) < 1e-12


# -- grid search -----------------------------------------------------------------------

def test_singleton_grid_returns_its_point():
    X, y = separable()
    point, _ = grid_search(GridSpec("KNN", {"n_neighbors": [3]}, folds=5), X, y)
    assert point == {"n_neighbors": 3}


def test_grid_tie_goes_to_first_point():
    X, y = separable()
    # var_smoothing far below the data variance leaves the model unchanged
    spec = GridSpec("NB", {"var_smoothing": [1e-12, 1e-13]}, folds=5)
    point, score = grid_search(spec, X, y)
    assert point == {"var_smoothing": 1e-12} and score == 1.0


def test_rf_grid_on_separable_data_picks_first_point():
    X, y = separable(40)
    spec = GRIDS["RF"]
    point, score = grid_search(spec, X, y)
    assert score == 1.0 and point == spec.points()[0]


def test_grid_search_needs_enough_rows_per_class():
    X, y = separable(12)
    with pytest.raises(TooFewSamples):
        grid_search(GRIDS["KNN"], X, y)


def test_grid_sizes():
    sizes = {k: len(s.points()) for k, s in GRIDS.items()}
    assert sizes == {"KNN": 6, "NB": 4, "DT": 45, "RF": 12, "XGB": 36, "LGBM": 36}


# -- paired experiment -----------------------------------------------------------------

def test_identical_feature_sets_give_identical_aucs():
    X, y = separable(60)
    X = X + np.random.default_rng(0).normal(0, 6, X.shape)
    plan = bootstrap_plan(60, 5, seed=1, labels=y)
    out = run_experiment({"a": X, "b": X.copy()}, y, plan, params={"n_estimators": 20})
    assert out["a"] == out["b"]


def test_random_labels_give_chance_auc():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(200, 5))
    y = rng.integers(0, 2, 200)
    plan = bootstrap_plan(200, 100, seed=2, labels=y)
    out = run_experiment({"noise": X}, y, plan, params={"n_estimators": 20})
    assert abs(np.mean(out["noise"]) - 0.5) <= 0.05


def test_signal_beats_noise():
    X, y = separable(80, seed=3)
    noise = np.random.default_rng(4).normal(size=X.shape)
    plan = bootstrap_plan(80, 10, seed=3, labels=y)
    out = run_experiment({"signal": X, "noise": noise}, y, plan, params={"n_estimators": 20})
    assert np.median(out["signal"]) > np.median(out["noise"])


def test_experiment_rejects_row_mismatch():
    plan = bootstrap_plan(10, 2)
    with pytest.raises(ValueError):
        run_experiment({"a": np.zeros((9, 2))}, np.zeros(9), plan)
