import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import two_clusters
from embedviz.classifiers import (
    DEFAULTS,
    AdaBoostClassifier,
    ClassifierSpec,
    DecisionTreeClassifier,
    Kind,
    KNNClassifier,
    MLPClassifier,
    RandomForestClassifier,
    SVMClassifier,
    adaboost_stage_weight,
    fit,
    load_model,
    loss_and_grad,
    mlp_backprop_step,
    default_classifiers,
    predict,
    predict_score,
    rbf_kernel,
    save_model,
)
from embedviz.classifiers.mlp import PARAM_NAMES, init_params
from embedviz.classifiers.tree import best_split
from embedviz.data import Dataset
from embedviz.errors import DataError, DegenerateError, DimensionMismatch, SingleClass

HALF_LN3 = 0.5493061443340549


def xor_data(seed=0):
    rng = np.random.default_rng(seed)
    base = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    lab = np.array([-1, 1, 1, -1])
    X = np.repeat(base, 25, axis=0) + rng.normal(scale=0.05, size=(100, 2))
    return X, np.repeat(lab, 25)


@pytest.mark.parametrize("spec", default_classifiers(), ids=lambda s: s.label)
def test_training_accuracy_on_clusters(spec, clusters):
    X, y = clusters
    model = fit(spec, Dataset(X, y))
    assert np.mean(predict(model, X) == y) >= 0.95


@pytest.mark.parametrize("spec", default_classifiers(), ids=lambda s: s.label)
def test_predict_agrees_with_score(spec):
    X, y = two_clusters(n=60, d=3, distance=1.5, seed=2)
    model = spec.build().fit(X, y)
    Q = np.random.default_rng(9).normal(size=(300, 3)) * 2
    s = predict_score(model, Q)
    p = predict(model, Q)
    assert np.all(np.isfinite(s))
    assert set(np.unique(p)) <= {-1, 1}
    assert np.array_equal(p, np.where(s >= model.threshold, 1, -1))


@pytest.mark.parametrize("spec", default_classifiers(), ids=lambda s: s.label)
def test_dimension_mismatch(spec, clusters):
    X, y = clusters
    model = spec.build().fit(X, y)
    with pytest.raises(DimensionMismatch):
        model.predict(np.zeros((3, 5)))


@pytest.mark.parametrize("kind", [k for k in Kind if k is not Kind.KNN])
def test_single_class_rejected(kind):
    with pytest.raises(SingleClass):
        ClassifierSpec(kind).build().fit(np.zeros((5, 2)), -np.ones(5))


def test_knn_single_class_allowed():
    m = KNNClassifier(3).fit(np.random.default_rng(0).normal(size=(6, 2)), np.ones(6))
    assert np.all(m.predict(np.random.default_rng(1).normal(size=(10, 2))) == 1)


def test_knn_majority_and_score():
    m = KNNClassifier(3).fit(np.array([[0, 0], [0, 1], [5, 5]], float), [-1, -1, 1])
    assert m.predict([[0, 0.5]]).tolist() == [-1]
    m = KNNClassifier(3).fit(np.array([[0, 0], [0, 1], [1, 0], [9, 9]], float), [1, 1, -1, -1])
    assert m.predict_score([[0.1, 0.1]])[0] == pytest.approx(2 / 3)


def test_knn_ties_to_lower_index():
    m = KNNClassifier(1).fit(np.array([[-1.0], [1.0]]), [1, -1])
    assert m.neighbors([[0.0]]).tolist() == [[0]]
    assert m.predict([[0.0]]).tolist() == [1]


def test_tree_step_function():
    X = np.linspace(-2, 2, 41)[:, None]
    y = np.where(X[:, 0] >= 0, 1, -1)
    m = DecisionTreeClassifier(max_depth=5).fit(X, y)
    assert np.mean(m.predict(X) == y) == 1.0
    assert m.n_nodes == 3
    assert m.threshold_[0] == pytest.approx(-0.05)


def test_best_split_ties_prefer_lower_feature():
    X = np.array([[0, 0], [0, 0], [1, 1], [1, 1]], float)
    pos = np.array([0, 0, 1, 1], float)
    f, t, imp = best_split(X, pos, np.ones(4), [0, 1])
    assert (f, t, imp) == (0, 0.5, 0.0)


def test_svm_clusters_kkt():
    X, y = two_clusters(n=40, d=2, distance=5.0, seed=1)
    m = SVMClassifier(gamma=2.0, C=1.0).fit(X, y)
    assert np.mean(m.predict(X) == y) == 1.0
    assert m.kkt_residual() <= 1e-6
    assert np.all(m.alpha_ >= 0) and np.all(m.alpha_ <= 1.0)
    assert m.converged_


def test_rbf_kernel_values():
    K = rbf_kernel(np.array([[0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 1.0]]), 0.5)
    assert K[0, 0] == 1.0
    assert K[0, 1] == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_adaboost_stage_weight():
    assert adaboost_stage_weight(0.5) == 0.0
    assert adaboost_stage_weight(0.25) == pytest.approx(HALF_LN3, abs=1e-15)
    assert adaboost_stage_weight(0.75) == pytest.approx(-HALF_LN3, abs=1e-15)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(DegenerateError):
            adaboost_stage_weight(bad)


def test_adaboost_score_is_weighted_vote():
    X, y = two_clusters(n=80, d=2, distance=2.0, seed=4)
    m = AdaBoostClassifier().fit(X, y)
    Q = np.random.default_rng(0).normal(size=(50, 2)) * 3
    votes = np.array([e.predict(Q) for e in m.estimators_])
    assert np.allclose(m.predict_score(Q), m.estimator_weights_ @ votes, atol=1e-12)
    unanimous = np.all(votes == 1, axis=0)
    if unanimous.any():
        assert np.allclose(m.predict_score(Q[unanimous]), m.estimator_weights_.sum())


def test_adaboost_stops_on_perfect_stump():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    m = AdaBoostClassifier().fit(X, [-1, -1, 1, 1])
    assert len(m.estimators_) == 1
    assert m.estimator_errors_[0] == 0.0


@pytest.mark.parametrize("max_features", [None, 1, 2])
def test_forest_of_one_equals_tree(max_features):
    X, y = two_clusters(n=80, d=4, distance=1.0, seed=5)
    rf = RandomForestClassifier(max_depth=4, n_estimators=1, max_features=max_features,
                                bootstrap=False, seed=11).fit(X, y)
    dt = DecisionTreeClassifier(max_depth=4, max_features=max_features, seed=11).fit(X, y)
    Q = np.random.default_rng(1).normal(size=(200, 4)) * 2
    assert np.array_equal(rf.predict(Q), dt.predict(Q))
    assert np.array_equal(rf.predict_score(Q), dt.predict_score(Q))


@pytest.mark.parametrize("cls", [RandomForestClassifier, MLPClassifier])
def test_seeded_models_bitwise_identical(cls):
    X, y = two_clusters(n=60, d=3, distance=2.0, seed=6)
    kw = {"max_epochs": 50} if cls is MLPClassifier else {}
    a = cls(seed=3, **kw).fit(X, y)
    b = cls(seed=3, **kw).fit(X, y)
    assert pickle.dumps(a) == pickle.dumps(b)


def test_mlp_xor():
    X, y = xor_data()
    m = MLPClassifier(hidden_units=100, max_epochs=1000).fit(X, y)
    assert np.mean(m.predict(X) == y) >= 0.95


def flat(params):
    return np.concatenate([params[k].ravel() for k in PARAM_NAMES])


def fd_grad(params, X, t, alpha, h=1e-6):
    out = []
    for k in PARAM_NAMES:
        g = np.zeros_like(params[k])
        for idx in np.ndindex(params[k].shape):
            p = {kk: v.copy() for kk, v in params.items()}
            p[k][idx] += h
            up = loss_and_grad(p, X, t, alpha)[0]
            p[k][idx] -= 2 * h
            down = loss_and_grad(p, X, t, alpha)[0]
            g[idx] = (up - down) / (2 * h)
        out.append(g.ravel())
    return np.concatenate(out)


def test_mlp_gradient_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(20, 4))
    t = (rng.random(20) < 0.5).astype(float)
    params = init_params(4, 3, rng)
    _, grads = loss_and_grad(params, X, t, alpha=1.0)
    g, fd = flat(grads), fd_grad(params, X, t, 1.0)
    assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-4


def test_mlp_alpha_zero_is_plain_log_loss():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(15, 2))
    t = (rng.random(15) < 0.5).astype(float)
    params = init_params(2, 3, rng)
    loss, _ = loss_and_grad(params, X, t, alpha=0.0)
    z1 = np.maximum(X @ params["W1"] + params["b1"], 0)
    prob = 1 / (1 + np.exp(-(z1 @ params["W2"] + params["b2"]).ravel()))
    want = -np.mean(t * np.log(prob) + (1 - t) * np.log(1 - prob))
    assert loss == pytest.approx(want, rel=1e-12)


def test_mlp_symmetric_units_get_symmetric_gradients():
    X = np.array([[1.0, -1.0], [-1.0, 1.0], [0.5, 0.5]])
    t = np.array([1.0, 0.0, 1.0])
    params = {"W1": np.zeros((2, 3)), "b1": np.full(3, 0.1),
              "W2": np.full((3, 1), 0.2), "b2": np.zeros(1)}
    _, g = loss_and_grad(params, X, t, alpha=1.0)
    assert np.allclose(g["W1"], g["W1"][:, :1])
    assert np.allclose(g["W2"], g["W2"][0])


def test_backprop_step_lowers_loss():
    X, y = two_clusters(n=40, d=2, distance=3.0, seed=7)
    t = (y == 1).astype(float)
    m = MLPClassifier(hidden_units=5, alpha=0.0).init(2)
    for _ in range(200):
        mlp_backprop_step(m, X, t)
    assert m.t_ == 200
    assert m.loss_curve_[-1] < m.loss_curve_[0]


def test_spec_parsing_and_defaults():
    assert Kind.parse("svm") is Kind.SVM_RBF
    assert Kind.parse("AdaBoost") is Kind.ADABOOST
    assert Kind.parse("random-forest") is Kind.RANDOM_FOREST
    with pytest.raises(ValueError):
        Kind.parse("lasso")
    with pytest.raises(ValueError):
        ClassifierSpec(Kind.KNN, {"gamma": 1})
    assert ClassifierSpec("knn").resolved() == {"k": 3}
    assert DEFAULTS[Kind.SVM_RBF]["gamma"] == 2.0
    assert [s.label for s in default_classifiers()] == ["KNN", "SVM", "DT", "RF", "MLP", "AdaBoost"]


def test_model_round_trip(tmp_path, clusters):
    X, y = clusters
    m = RandomForestClassifier().fit(X, y)
    save_model(m, tmp_path / "m.model")
    back = load_model(tmp_path / "m.model")
    assert np.array_equal(back.predict_score(X), m.predict_score(X))
    (tmp_path / "junk").write_bytes(pickle.dumps({"x": 1}))
    with pytest.raises(DataError):
        load_model(tmp_path / "junk")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4))
def test_tree_scores_are_leaf_fractions(seed, depth):
    X, y = two_clusters(n=50, d=3, distance=1.0, seed=seed)
    m = DecisionTreeClassifier(max_depth=depth).fit(X, y)
    leaves = m.apply(X)
    for leaf in np.unique(leaves):
        assert m.value_[leaf] == pytest.approx(np.mean(y[leaves == leaf] == 1))
