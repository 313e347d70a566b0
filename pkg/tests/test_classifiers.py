import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devmine.classifiers import (
    ArityError,
    FeatureVectorDataset,
    KnnConfig,
    KnnModel,
    Leaf,
    NoFeaturesError,
    Split,
    TreeParams,
    gini,
    knn_predict,
    predict_tree,
    train_decision_tree,
    vectorize,
)
from devmine.log_model import ClassLabel
from devmine.patterns import FeatureDefinition, Kind, SequencePattern
from helpers import ids, make_log


def dataset(X, deviant):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return FeatureVectorDataset(tuple(range(X.shape[1])), X, np.asarray(deviant, dtype=bool),
                                tuple(f"t{i}" for i in range(len(X))))


def ia(log, letter, fid):
    return FeatureDefinition(fid, SequencePattern(Kind.IA, ids(log, letter)), 1.0)


def test_vectorize_counts():
    log = make_log(["aba", "c"], [0, 1])
    data = vectorize(log, [ia(log, "a", 0), ia(log, "b", 1)])
    assert data.X.tolist() == [[2, 1], [0, 0]]
    assert len(data) == 2
    assert data.trace_ids == log.case_ids
    assert data.labels == [ClassLabel.NORMAL, ClassLabel.DEVIANT]


def test_vectorize_needs_features():
    with pytest.raises(NoFeaturesError):
        vectorize(make_log(["a"], [0]), [])


def test_arity_is_checked():
    with pytest.raises(ArityError):
        FeatureVectorDataset((0, 1), np.zeros((2, 1)), np.zeros(2, bool), ("a", "b"))


def test_gini_values():
    assert gini(5, 5) == 0.5
    assert gini(4, 0) == 0
    assert gini(0, 0) == 0


def test_separable_feature_gives_stump():
    data = dataset([0, 0, 0, 1, 1, 1], [0, 0, 0, 1, 1, 1])
    model = train_decision_tree(data)
    assert isinstance(model.root, Split)
    assert model.root.threshold == 0.5
    assert isinstance(model.root.left, Leaf) and isinstance(model.root.right, Leaf)
    preds = model.predict(data.X)
    assert [p.label for p in preds] == data.labels


def test_single_class_gives_leaf():
    model = train_decision_tree(dataset([1, 2, 3], [1, 1, 1]))
    assert model.root == Leaf(0, 3)
    assert predict_tree(model, [9]).label is ClassLabel.DEVIANT


def test_leaf_confidence():
    model = train_decision_tree(dataset([0, 0, 0, 0], [1, 1, 1, 0]))
    p = predict_tree(model, [0])
    assert p.deviant_confidence == 0.75 and p.label is ClassLabel.DEVIANT


def test_value_at_threshold_goes_left():
    data = dataset([0, 0, 2, 2], [0, 0, 1, 1])
    model = train_decision_tree(data)
    assert model.root.threshold == 1.0
    assert predict_tree(model, [1.0]).label is ClassLabel.NORMAL
    assert predict_tree(model, [1.0001]).label is ClassLabel.DEVIANT


def test_predict_arity_mismatch():
    model = train_decision_tree(dataset([0, 1], [0, 1]))
    with pytest.raises(ArityError):
        predict_tree(model, [0, 1])


def test_tree_ties_prefer_lower_feature():
    X = np.array([[0, 0], [0, 0], [1, 1], [1, 1]])
    model = train_decision_tree(dataset(X, [0, 0, 1, 1]))
    assert model.root.feature == 0


def test_tree_json():
    model = train_decision_tree(dataset([0, 0, 1, 1], [0, 0, 1, 1]))
    d = json.loads(model.to_json())
    assert d["root"]["threshold"] == 0.5
    assert d["root"]["left"]["leaf"] == "normal"


def _splits(node):
    if isinstance(node, Leaf):
        return []
    return [node] + _splits(node.left) + _splits(node.right)


data_sets = st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(0, 3), min_size=3, max_size=3), min_size=n, max_size=n),
    st.lists(st.booleans(), min_size=n, max_size=n),
))


@settings(max_examples=80, deadline=None)
@given(data_sets, st.randoms(use_true_random=False))
def test_row_permutation_invariance(d, rnd):
    X, y = d
    base = dataset(X, y)
    perm = list(range(len(X)))
    rnd.shuffle(perm)
    shuffled = base.take(perm)
    a, b = train_decision_tree(base), train_decision_tree(shuffled)
    assert a.root == b.root
    queries = np.array([[i, j, k] for i in range(4) for j in range(4) for k in range(4)], float)
    assert a.predict(queries) == b.predict(queries)


@settings(max_examples=80, deadline=None)
@given(data_sets)
def test_splits_reduce_gini(d):
    X, y = d
    data = dataset(X, y)
    model = train_decision_tree(data, TreeParams(min_samples_leaf=1))
    for s in _splits(model.root):
        n = s.n_normal + s.n_deviant
        left, right = s.left, s.right
        child = ((left.n_normal + left.n_deviant) * gini(left.n_normal, left.n_deviant)
                 + (right.n_normal + right.n_deviant) * gini(right.n_normal, right.n_deviant)) / n
        assert child < gini(s.n_normal, s.n_deviant)


@settings(max_examples=80, deadline=None)
@given(data_sets, st.integers(0, 2))
def test_disjoint_ranges_fit_perfectly(d, col):
    X, y = d
    X = np.array(X, dtype=float)
    y = np.array(y)
    X[:, col] = np.where(y, 10 + X[:, col], X[:, col])
    data = dataset(X, y)
    model = train_decision_tree(data, TreeParams(min_samples_leaf=1))
    assert [p.label for p in model.predict(X)] == data.labels


def test_knn_exact_match_k1():
    data = dataset([[0, 0], [5, 5]], [0, 1])
    assert knn_predict(data, KnnConfig(1), [5, 5]).label is ClassLabel.DEVIANT
    assert knn_predict(data, KnnConfig(1), [0, 0]).label is ClassLabel.NORMAL


def test_knn_majority_confidence():
    data = dataset(list(range(10)), [1] * 6 + [0] * 2 + [0] * 2)
    p = knn_predict(data, KnnConfig(8), [0])
    assert p.label is ClassLabel.DEVIANT and p.deviant_confidence == 0.75


def test_knn_vote_tie_is_deviant():
    data = dataset([0, 1], [0, 1])
    p = knn_predict(data, KnnConfig(2), [0.5])
    assert p.label is ClassLabel.DEVIANT and p.deviant_confidence == 0.5


def test_knn_distance_tie_prefers_lower_index():
    data = dataset([-1, 1], [0, 1])
    assert knn_predict(data, KnnConfig(1), [0]).label is ClassLabel.NORMAL


def test_knn_errors():
    data = dataset([0, 1], [0, 1])
    with pytest.raises(ValueError):
        knn_predict(data, KnnConfig(3), [0])
    with pytest.raises(ArityError):
        knn_predict(data, KnnConfig(1), [0, 0])
    with pytest.raises(ValueError):
        KnnConfig(0)


@settings(max_examples=60, deadline=None)
@given(data_sets)
def test_knn_full_k_predicts_majority(d):
    X, y = d
    data = dataset(X, y)
    model = KnnModel(data, KnnConfig(len(data)))
    majority = ClassLabel.DEVIANT if 2 * sum(y) >= len(y) else ClassLabel.NORMAL
    assert {p.label for p in model.predict(data.X)} == {majority}
