"""Stratified k-fold benchmark: mining, selection, training and scoring per fold."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .classifiers import (
    DecisionTreeModel,
    FeatureVectorDataset,
    KnnConfig,
    KnnModel,
    Prediction,
    TreeParams,
    train_decision_tree,
)
from .feature_selection import ScoredFeature, SelectionConfig, score_features, select_by_coverage
from .log_model import ClassLabel, EventLog, Trace
from .patterns import DEFAULT_MAX_LEN, FeatureDefinition, Kind, mine, value_matrix
from .rules import extract_rules

CLASSIFIERS = ("tree", "knn")

AUC_NOTE = (
    "AUC = P(deviant confidence > normal confidence) + 0.5 * P(tie), deviant as the positive "
    "class; computed from average ranks (Mann-Whitney U)."
)


def derive_seed(seed: int, *tags: int) -> int:
    """Independent sub-seed for one purpose (and optionally one fold)."""
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    folds: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    def train_ids(self, i: int) -> tuple[str, ...]:
        return self.folds[i][0]

    def test_ids(self, i: int) -> tuple[str, ...]:
        return self.folds[i][1]


def stratified_kfold(log: EventLog, k: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle each class with ``seed`` and deal its traces round-robin into ``k`` folds.

    Dealing continues across classes, so fold sizes differ by at most one
    and each class is spread within one trace of even.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    deviant = log.deviant_mask()
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    slot = 0
    for cls in (False, True):
        members = [i for i, d in enumerate(deviant) if d is cls]
        if len(members) < k:
            name = "deviant" if cls else "normal"
            raise ValueError(f"{name} class has {len(members)} traces, fewer than k={k}")
        for i in rng.permutation(members):
            buckets[slot % k].append(int(i))
            slot += 1
    ids = log.case_ids
    folds = []
    for f in range(k):
        test = sorted(buckets[f])
        train = sorted(i for g in range(k) if g != f for i in buckets[g])
        folds.append((tuple(ids[i] for i in train), tuple(ids[i] for i in test)))
    return FoldPlan(k, seed, tuple(folds))


def oversample_indices(deviant: Sequence[bool], seed: int) -> list[int]:
    """Row indices with minority rows duplicated at random until classes balance."""
    flags = np.asarray(deviant, dtype=bool)
    dev = np.nonzero(flags)[0]
    norm = np.nonzero(~flags)[0]
    if len(dev) == 0 or len(norm) == 0:
        raise ValueError("oversampling needs both classes")
    minority, gap = (dev, len(norm) - len(dev)) if len(dev) < len(norm) else (norm, len(dev) - len(norm))
    extra = np.random.default_rng(seed).choice(minority, size=gap, replace=True) if gap else []
    return list(range(len(flags))) + [int(i) for i in extra]


def oversample(train: Sequence[Trace], seed: int) -> list[Trace]:
    idx = oversample_indices([t.is_deviant for t in train], seed)
    return [train[i] for i in idx]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / (self.tp + self.tn + self.fp + self.fn)


def auc_score(confidences: Sequence[float], deviant: Sequence[bool]) -> float | None:
    """Mann-Whitney AUC; ``None`` when only one class is present."""
    flags = np.asarray(deviant, dtype=bool)
    n_pos = int(flags.sum())
    n_neg = len(flags) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(np.asarray(confidences, dtype=float), method="average")
    u = ranks[flags].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def score(
    predictions: Sequence[Prediction], truth: Sequence[ClassLabel]
) -> tuple[float, ConfusionMatrix, float | None]:
    if len(predictions) != len(truth):
        raise ValueError(f"{len(predictions)} predictions for {len(truth)} labels")
    if not predictions:
        raise ValueError("nothing to score")
    tp = tn = fp = fn = 0
    for p, t in zip(predictions, truth):
        if t is ClassLabel.DEVIANT:
            tp += p.label is ClassLabel.DEVIANT
            fn += p.label is not ClassLabel.DEVIANT
        else:
            tn += p.label is not ClassLabel.DEVIANT
            fp += p.label is ClassLabel.DEVIANT
    cm = ConfusionMatrix(tp, tn, fp, fn)
    auc = auc_score([p.deviant_confidence for p in predictions], [t is ClassLabel.DEVIANT for t in truth])
    return cm.accuracy, cm, auc


@dataclass(frozen=True)
class BenchmarkConfig:
    kinds: tuple[Kind, ...] = tuple(Kind)
    classifiers: tuple[str, ...] = CLASSIFIERS
    selection: SelectionConfig = SelectionConfig()
    tree: TreeParams = TreeParams()
    knn: KnnConfig = KnnConfig()
    k_folds: int = 5
    seed: int = 0
    ip_max_len: int = DEFAULT_MAX_LEN
    oversample: bool = True
    # oversample when majority / minority exceeds this ratio
    oversample_ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(Kind(k) for k in self.kinds))
        if not self.kinds:
            raise ValueError("at least one feature kind is required")
        if not self.classifiers:
            raise ValueError("at least one classifier is required")
        unknown = set(self.classifiers) - set(CLASSIFIERS)
        if unknown:
            raise ValueError(f"unknown classifier(s) {sorted(unknown)}")


@dataclass
class FoldModel:
    """Everything learned from one training fold for one feature kind."""

    kind: Kind
    features: list[FeatureDefinition]
    scored: list[ScoredFeature]
    selected: list[ScoredFeature]
    train: FeatureVectorDataset | None
    models: dict[str, object] = field(default_factory=dict)
    mining_seconds: float = 0.0

    @property
    def selected_features(self) -> list[FeatureDefinition]:
        return [s.feature for s in self.selected]


def _needs_oversampling(deviant: np.ndarray, ratio: float) -> bool:
    n_dev = int(deviant.sum())
    n_norm = len(deviant) - n_dev
    if n_dev == 0 or n_norm == 0:
        return False
    return max(n_dev, n_norm) / min(n_dev, n_norm) > ratio


def fit_fold(
    train_log: EventLog, kind: Kind | str, config: BenchmarkConfig, seed: int, fit_models: bool = True
) -> FoldModel:
    """Mine, score and select on the training traces only, then fit classifiers.

    Fisher scores use the training fold before oversampling; the classifiers
    see the oversampled rows.
    """
    kind = Kind(kind)
    start = time.perf_counter()
    features = mine(train_log, kind, config.selection.min_support, config.ip_max_len)
    mining_seconds = time.perf_counter() - start

    values = value_matrix(features, train_log)
    scored = score_features(features, train_log, values)
    column = {f.id: j for j, f in enumerate(features)}
    selected = select_by_coverage(
        scored, train_log, config.selection, {fid: values[:, j] for fid, j in column.items()}
    )
    fm = FoldModel(kind, features, scored, selected, None, mining_seconds=mining_seconds)
    if not selected:
        return fm

    cols = [column[s.feature.id] for s in selected]
    train = FeatureVectorDataset(
        tuple(s.feature.id for s in selected),
        values[:, cols],
        np.asarray(train_log.deviant_mask(), dtype=bool),
        train_log.case_ids,
        tuple(s.feature.describe(train_log.activities) for s in selected),
    )
    fm.train = train
    if not fit_models:
        return fm
    fit_rows = train
    if config.oversample and _needs_oversampling(train.deviant, config.oversample_ratio):
        fit_rows = train.take(oversample_indices(train.deviant, seed))
    for name in config.classifiers:
        if name == "tree":
            fm.models[name] = train_decision_tree(fit_rows, config.tree)
        else:
            fm.models[name] = KnnModel(fit_rows, config.knn)
    return fm


@dataclass(frozen=True)
class CellResult:
    kind: str
    classifier: str
    fold: int
    accuracy: float | None
    auc: float | None
    tp: int | None
    tn: int | None
    fp: int | None
    fn: int | None
    n_mined: int
    n_selected: int
    mean_fisher: float | None
    n_rules: int | None
    mining_seconds: float
    error: str = ""


REPORT_COLUMNS = (
    "kind", "classifier", "fold", "accuracy", "auc", "tp", "tn", "fp", "fn",
    "n_mined", "n_selected", "mean_fisher", "n_rules", "error",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _json_num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _mean(xs) -> float | None:
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


@dataclass
class EvalReport:
    cells: list[CellResult]
    kinds: tuple[str, ...]
    classifiers: tuple[str, ...]
    k_folds: int
    seed: int

    def cell(self, kind, classifier, fold) -> CellResult:
        for c in self.cells:
            if c.kind == str(kind) and c.classifier == classifier and c.fold == fold:
                return c
        raise KeyError((kind, classifier, fold))

    def rows(self, kind, classifier) -> list[CellResult]:
        return [c for c in self.cells if c.kind == str(kind) and c.classifier == classifier]

    def mean(self, kind, classifier, metric: str) -> float | None:
        return _mean(getattr(c, metric) for c in self.rows(kind, classifier))

    def summary(self) -> list[dict]:
        out = []
        for kind in self.kinds:
            for clf in self.classifiers:
                out.append({
                    "kind": kind,
                    "classifier": clf,
                    "accuracy": self.mean(kind, clf, "accuracy"),
                    "auc": self.mean(kind, clf, "auc"),
                    "n_selected": self.mean(kind, clf, "n_selected"),
                    "mean_fisher": self.mean(kind, clf, "mean_fisher"),
                    "mining_seconds": self.mean(kind, clf, "mining_seconds"),
                })
        return out

    def write_csv(self, path) -> None:
        """Per-cell results; runtimes are kept out so the file is reproducible."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for c in self.cells:
                w.writerow([_fmt(getattr(c, col)) for col in REPORT_COLUMNS])

    def write_json(self, path) -> None:
        doc = {
            "metadata": {"k_folds": self.k_folds, "seed": self.seed, "auc_definition": AUC_NOTE},
            "cells": [
                {col: _json_num(getattr(c, col)) for col in REPORT_COLUMNS} for c in self.cells
            ],
            "summary": [
                {k: _json_num(v) for k, v in row.items() if k != "mining_seconds"}
                for row in self.summary()
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_summary_tables(self, directory) -> list[str]:
        """Accuracy, AUC and Fisher tables with feature kinds as columns."""
        written = []
        for metric in ("accuracy", "auc", "mean_fisher", "n_selected"):
            name = f"summary_{metric}.csv"
            with open(f"{directory}/{name}", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["classifier", *self.kinds])
                for clf in self.classifiers:
                    w.writerow([clf, *(_fmt(self.mean(k, clf, metric)) for k in self.kinds)])
            written.append(name)
        return written

    def write_runtime_csv(self, path) -> None:
        """Wall-clock mining time per kind and fold; varies between runs."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kind", "fold", "mining_seconds"])
            seen = set()
            for c in self.cells:
                if (c.kind, c.fold) not in seen:
                    seen.add((c.kind, c.fold))
                    w.writerow([c.kind, c.fold, f"{c.mining_seconds:.6f}"])


def _mean_fisher(selected: Sequence[ScoredFeature]) -> float | None:
    if not selected:
        return None
    return float(np.mean([s.fisher for s in selected]))


def run_benchmark(log: EventLog, config: BenchmarkConfig = BenchmarkConfig()) -> EvalReport:
    """Stratified k-fold evaluation of every (feature kind, classifier) pair.

    Failures inside a cell are recorded in its ``error`` field and the
    remaining cells still run.
    """
    plan = stratified_kfold(log, config.k_folds, derive_seed(config.seed, 0))
    cells: list[CellResult] = []
    for fold in range(plan.k):
        train_log = log.select_cases(plan.train_ids(fold))
        test_log = log.select_cases(plan.test_ids(fold))
        truth = test_log.labels()
        fold_seed = derive_seed(config.seed, 1, fold)
        for kind in config.kinds:
            try:
                fm = fit_fold(train_log, kind, config, fold_seed)
            except Exception as exc:  # noqa: BLE001 - reported per cell
                for clf in config.classifiers:
                    cells.append(CellResult(str(kind), clf, fold, None, None, None, None, None, None,
                                            0, 0, None, None, 0.0, f"{type(exc).__name__}: {exc}"))
                continue
            base = dict(
                kind=str(kind), fold=fold, n_mined=len(fm.features), n_selected=len(fm.selected),
                mean_fisher=_mean_fisher(fm.selected), mining_seconds=fm.mining_seconds,
            )
            for clf in config.classifiers:
                if clf not in fm.models:
                    cells.append(CellResult(classifier=clf, accuracy=None, auc=None, tp=None, tn=None,
                                            fp=None, fn=None, n_rules=None,
                                            error="no features selected", **base))
                    continue
                try:
                    model = fm.models[clf]
                    X_test = value_matrix(fm.selected_features, test_log)
                    acc, cm, auc = score(model.predict(X_test), truth)
                    n_rules = None
                    if isinstance(model, DecisionTreeModel):
                        n_rules = sum(1 for r in extract_rules(model) if r.antecedent)
                    cells.append(CellResult(classifier=clf, accuracy=acc, auc=auc, tp=cm.tp, tn=cm.tn,
                                            fp=cm.fp, fn=cm.fn, n_rules=n_rules, **base))
                except Exception as exc:  # noqa: BLE001 - reported per cell
                    cells.append(CellResult(classifier=clf, accuracy=None, auc=None, tp=None, tn=None,
                                            fp=None, fn=None, n_rules=None,
                                            error=f"{type(exc).__name__}: {exc}", **base))
    return EvalReport(cells, tuple(str(k) for k in config.kinds), tuple(config.classifiers),
                      plan.k, config.seed)
