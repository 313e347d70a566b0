"""Trace vectorization, a Gini decision tree and k-nearest neighbours."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .log_model import ClassLabel, EventLog
from .patterns import FeatureDefinition, value_matrix


class ArityError(ValueError):
    pass


class NoFeaturesError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVectorDataset:
    """Rows of feature counts with a deviant flag per trace."""

    feature_ids: tuple[int, ...]
    X: np.ndarray
    deviant: np.ndarray
    trace_ids: tuple[str, ...]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_ids):
            raise ArityError("row arity must equal the number of feature ids")
        if len(self.deviant) != self.X.shape[0] or len(self.trace_ids) != self.X.shape[0]:
            raise ValueError("labels and trace ids must match the row count")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def labels(self) -> list[ClassLabel]:
        return [ClassLabel.DEVIANT if d else ClassLabel.NORMAL for d in self.deviant]

    def take(self, rows: Sequence[int]) -> "FeatureVectorDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return FeatureVectorDataset(
            self.feature_ids,
            self.X[rows],
            self.deviant[rows],
            tuple(self.trace_ids[i] for i in rows),
            self.feature_names,
        )

    def name(self, column: int) -> str:
        return self.feature_names[column] if self.feature_names else f"f{self.feature_ids[column]}"


def vectorize(log: EventLog, features: Sequence[FeatureDefinition]) -> FeatureVectorDataset:
    if not features:
        raise NoFeaturesError("cannot vectorize without features")
    return FeatureVectorDataset(
        tuple(f.id for f in features),
        value_matrix(features, log),
        np.asarray(log.deviant_mask(), dtype=bool),
        log.case_ids,
        tuple(f.describe(log.activities) for f in features),
    )


@dataclass(frozen=True)
class Prediction:
    label: ClassLabel
    deviant_confidence: float


def _prediction(n_normal: int, n_deviant: int) -> Prediction:
    conf = n_deviant / (n_normal + n_deviant)
    label = ClassLabel.DEVIANT if n_deviant >= n_normal else ClassLabel.NORMAL
    return Prediction(label, conf)


def gini(n_normal: int, n_deviant: int) -> float:
    n = n_normal + n_deviant
    if n == 0:
        return 0.0
    p, q = n_normal / n, n_deviant / n
    return 1.0 - p * p - q * q


@dataclass(frozen=True)
class Leaf:
    n_normal: int
    n_deviant: int

    @property
    def label(self) -> ClassLabel:
        return _prediction(self.n_normal, self.n_deviant).label


@dataclass(frozen=True)
class Split:
    """``row[feature] <= threshold`` goes left, otherwise right."""

    feature: int
    threshold: float
    left: "Node"
    right: "Node"
    n_normal: int
    n_deviant: int


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 20
    min_samples_leaf: int = 2
    min_gain: float = 1e-7


@dataclass(frozen=True)
class DecisionTreeModel:
    root: Node
    feature_ids: tuple[int, ...]
    feature_names: tuple[str, ...] = field(default=())

    @property
    def n_features(self) -> int:
        return len(self.feature_ids)

    def leaves(self) -> list[Leaf]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                out.append(node)
            else:
                stack.extend((node.right, node.left))
        return out

    def predict(self, X: np.ndarray) -> list[Prediction]:
        return [predict_tree(self, row) for row in np.atleast_2d(X)]

    def to_dict(self) -> dict:
        def enc(node):
            if isinstance(node, Leaf):
                return {
                    "leaf": str(node.label),
                    "counts": {"normal": node.n_normal, "deviant": node.n_deviant},
                }
            name = self.feature_names[node.feature] if self.feature_names else None
            return {
                "feature_index": node.feature,
                "feature_id": self.feature_ids[node.feature],
                "feature": name,
                "threshold": node.threshold,
                "left": enc(node.left),
                "right": enc(node.right),
            }

        return {"feature_ids": list(self.feature_ids), "root": enc(self.root)}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Highest-gain split as ``(gain, feature, threshold)``.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    n = len(y)
    n_dev = int(y.sum())
    parent = gini(n - n_dev, n_dev)
    best = (-np.inf, -1, 0.0)
    sizes = np.arange(1, n)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        cum_dev = np.cumsum(y[order])[:-1]
        valid = (xs[1:] != xs[:-1]) & (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not valid.any():
            continue
        nl = sizes[valid]
        dl = cum_dev[valid]
        nr = n - nl
        dr = n_dev - dl
        gl = 1.0 - (dl / nl) ** 2 - ((nl - dl) / nl) ** 2
        gr = 1.0 - (dr / nr) ** 2 - ((nr - dr) / nr) ** 2
        gain = parent - (nl * gl + nr * gr) / n
        k = int(np.argmax(gain))
        if gain[k] > best[0]:
            pos = np.nonzero(valid)[0][k]
            best = (float(gain[k]), j, float((xs[pos] + xs[pos + 1]) / 2))
    return best


def train_decision_tree(data: FeatureVectorDataset, params: TreeParams = TreeParams()) -> DecisionTreeModel:
    """CART-style binary tree minimising weighted Gini impurity.

    Candidate thresholds are midpoints between consecutive distinct values.
    Growth stops at ``max_depth``, when a child would hold fewer than
    ``min_samples_leaf`` rows, or when the best gain is at most ``min_gain``.
    """
    X = np.asarray(data.X, dtype=float)
    y = np.asarray(data.deviant, dtype=np.int64)

    def grow(rows: np.ndarray, depth: int) -> Node:
        yr = y[rows]
        n_dev = int(yr.sum())
        n_norm = len(rows) - n_dev
        if depth >= params.max_depth or n_dev == 0 or n_norm == 0:
            return Leaf(n_norm, n_dev)
        gain, j, thr = _best_split(X[rows], yr, params.min_samples_leaf)
        if j < 0 or gain <= params.min_gain:
            return Leaf(n_norm, n_dev)
        go_left = X[rows, j] <= thr
        return Split(
            j, thr, grow(rows[go_left], depth + 1), grow(rows[~go_left], depth + 1), n_norm, n_dev
        )

    if len(y) == 0:
        raise ValueError("cannot train on an empty dataset")
    return DecisionTreeModel(grow(np.arange(len(y)), 0), data.feature_ids, data.feature_names)


def predict_tree(model: DecisionTreeModel, row) -> Prediction:
    row = np.asarray(row, dtype=float)
    if row.shape != (model.n_features,):
        raise ArityError(f"expected {model.n_features} values, got shape {row.shape}")
    node = model.root
    while isinstance(node, Split):
        node = node.left if row[node.feature] <= node.threshold else node.right
    return _prediction(node.n_normal, node.n_deviant)


@dataclass(frozen=True)
class KnnConfig:
    k: int = 8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")


def knn_predict(train: FeatureVectorDataset, config: KnnConfig, row) -> Prediction:
    """Majority vote of the ``k`` Euclidean nearest training rows.

    Distance ties go to the lower training index; a split vote is deviant.
    """
    if len(train) == 0:
        raise ValueError("k-NN needs a non-empty training set")
    if config.k > len(train):
        raise ValueError(f"k={config.k} exceeds training size {len(train)}")
    row = np.asarray(row, dtype=float)
    if row.shape != (train.X.shape[1],):
        raise ArityError(f"expected {train.X.shape[1]} values, got shape {row.shape}")
    dist = ((train.X - row) ** 2).sum(axis=1)
    nearest = np.argsort(dist, kind="stable")[: config.k]
    n_dev = int(train.deviant[nearest].sum())
    return _prediction(config.k - n_dev, n_dev)


@dataclass(frozen=True)
class KnnModel:
    train: FeatureVectorDataset
    config: KnnConfig = KnnConfig()

    def predict(self, X: np.ndarray) -> list[Prediction]:
        return [knn_predict(self.train, self.config, row) for row in np.atleast_2d(X)]
