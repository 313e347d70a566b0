import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devmine.classifiers import KnnConfig, Prediction
from devmine.evaluation import (
    BenchmarkConfig,
    ConfusionMatrix,
    auc_score,
    derive_seed,
    fit_fold,
    oversample,
    oversample_indices,
    run_benchmark,
    score,
    stratified_kfold,
)
from devmine.feature_selection import SelectionConfig
from devmine.log_model import (
    ClassLabel,
    FormatConfig,
    LabelingSpec,
    label_traces,
    parse_event_log,
    write_event_log,
)
from devmine.patterns import feature_to_json
from devmine.synthgen import OUTCOME_COLUMN, SynthSpec, generate
from helpers import make_log
import oracles

D, N = ClassLabel.DEVIANT, ClassLabel.NORMAL


def labelled(n_normal, n_deviant):
    return make_log(["ab"] * (n_normal + n_deviant), [0] * n_normal + [1] * n_deviant)


def test_folds_exact_division():
    log = labelled(60, 40)
    plan = stratified_kfold(log, 5, 0)
    dev = dict(zip(log.case_ids, log.deviant_mask()))
    for i in range(5):
        test = plan.test_ids(i)
        assert Counter(dev[c] for c in test) == {False: 12, True: 8}


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 60), st.integers(5, 60), st.integers(2, 5), st.integers(0, 10))
def test_folds_partition_and_stratify(n_norm, n_dev, k, seed):
    log = labelled(n_norm, n_dev)
    plan = stratified_kfold(log, k, seed)
    dev = dict(zip(log.case_ids, log.deviant_mask()))
    tests = [plan.test_ids(i) for i in range(k)]
    assert sorted(c for t in tests for c in t) == sorted(log.case_ids)
    sizes = [len(t) for t in tests]
    assert max(sizes) - min(sizes) <= 1
    for i, t in enumerate(tests):
        assert set(plan.train_ids(i)) == set(log.case_ids) - set(t)
        n_d = sum(dev[c] for c in t)
        assert abs(n_d - n_dev / k) <= 1
        assert abs((len(t) - n_d) - n_norm / k) <= 1


def test_fold_plan_determinism_and_errors():
    log = labelled(20, 10)
    assert stratified_kfold(log, 5, 3) == stratified_kfold(log, 5, 3)
    with pytest.raises(ValueError):
        stratified_kfold(labelled(20, 3), 5, 0)
    with pytest.raises(ValueError):
        stratified_kfold(log, 1, 0)


def test_oversampling_balances():
    flags = [False] * 80 + [True] * 20
    idx = oversample_indices(flags, 7)
    counts = Counter(flags[i] for i in idx)
    assert counts == {False: 80, True: 80}
    assert idx[:100] == list(range(100))
    assert all(flags[i] for i in idx[100:])


def test_oversampling_balanced_is_identity():
    assert oversample_indices([True, False, True, False], 0) == [0, 1, 2, 3]


def test_oversampled_traces_copy_deviants():
    log = make_log(["ab", "ba", "abc", "c", "cc"], [0, 0, 0, 1, 1])
    out = oversample(list(log), 1)
    originals = {t.symbols for t in log if t.is_deviant}
    assert Counter(t.is_deviant for t in out) == {False: 3, True: 3}
    assert all(t.symbols in originals for t in out if t.is_deviant)


def test_oversampling_single_class():
    with pytest.raises(ValueError):
        oversample_indices([True, True], 0)


def test_accuracy_from_confusion():
    assert ConfusionMatrix(tp=3, tn=4, fp=1, fn=2).accuracy == 0.7


def test_score_counts():
    preds = [Prediction(D, 1.0), Prediction(N, 0.0), Prediction(D, 0.6), Prediction(N, 0.2)]
    acc, cm, auc = score(preds, [D, N, N, D])
    assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 1, 1)
    assert acc == 0.5
    with pytest.raises(ValueError):
        score(preds, [D])


def test_auc_examples():
    assert auc_score([0.9, 0.8, 0.7, 0.1], [1, 1, 0, 0]) == 1.0
    assert auc_score([0.9, 0.4, 0.6, 0.2], [1, 1, 0, 0]) == 0.75
    assert auc_score([0.3] * 6, [1, 0, 1, 0, 1, 0]) == 0.5
    assert auc_score([0.3, 0.4], [1, 1]) is None


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([0, 0.125, 0.25, 0.5, 0.75, 1.0]), st.booleans()),
                min_size=2, max_size=50).filter(lambda r: len({p for _, p in r}) == 2))
def test_auc_equals_pairwise_count(rows):
    scores = [s for s, _ in rows]
    flags = [p for _, p in rows]
    assert auc_score(scores, flags) == oracles.pairwise_auc(scores, flags)


def test_derived_seeds_differ():
    assert derive_seed(0, 1, 0) != derive_seed(0, 1, 1)
    assert derive_seed(5, 2) == derive_seed(5, 2)


@pytest.fixture(scope="module")
def planted():
    return generate(SynthSpec(n_traces=100, seed=4))


def test_no_leak(planted, tmp_path):
    """Per-fold artifacts are the same whether test traces were present or deleted up front."""
    config = BenchmarkConfig(kinds=("IP", "MR"), ip_max_len=5)
    plan = stratified_kfold(planted, 5, derive_seed(0, 0))
    fc = FormatConfig(outcome=OUTCOME_COLUMN)
    for fold in (0, 3):
        test = set(plan.test_ids(fold))
        reduced = planted.with_traces([t for t in planted if t.case_id not in test])
        path = tmp_path / f"train{fold}.csv"
        write_event_log(reduced, path, fc)
        reparsed = label_traces(parse_event_log(path, fc), LabelingSpec(
            "outcome", outcome_attribute=OUTCOME_COLUMN, deviant_value="deviant"))
        for kind in config.kinds:
            a = fit_fold(planted.select_cases(plan.train_ids(fold)), kind, config, 11)
            b = fit_fold(reparsed, kind, config, 11)
            assert [feature_to_json(f, planted.activities) for f in a.features] == \
                   [feature_to_json(f, reparsed.activities) for f in b.features]
            assert [(s.feature.id, s.fisher) for s in a.selected] == \
                   [(s.feature.id, s.fisher) for s in b.selected]
            assert np.array_equal(a.train.X, b.train.X)
            assert a.models["tree"].to_json() == b.models["tree"].to_json()
            assert np.array_equal(a.models["knn"].train.X, b.models["knn"].train.X)


def test_oversampling_never_reaches_test_rows():
    log = make_log(["aab"] * 16 + ["ab"] * 4 + ["abab"] * 4, [0] * 16 + [1] * 8)
    config = BenchmarkConfig(kinds=("IA",), classifiers=("knn",), knn=KnnConfig(3))
    plan = stratified_kfold(log, 4, 0)
    for fold in range(4):
        train = log.select_cases(plan.train_ids(fold))
        fm = fit_fold(train, "IA", config, 5)
        rows = fm.models["knn"].train
        assert set(rows.trace_ids) <= set(plan.train_ids(fold))
        assert int(rows.deviant.sum()) == len(rows) - int(rows.deviant.sum())


def test_benchmark_shape_and_bounds(planted):
    config = BenchmarkConfig(kinds=("IA", "IP"), ip_max_len=5)
    report = run_benchmark(planted, config)
    assert len(report.cells) == 5 * 2 * 2
    for kind in ("IA", "IP"):
        for clf in ("tree", "knn"):
            assert len(report.rows(kind, clf)) == 5
    for c in report.cells:
        if c.accuracy is not None:
            assert 0 <= c.accuracy <= 1
        if c.auc is not None:
            assert 0 <= c.auc <= 1
    assert report.mean("IP", "tree", "accuracy") == 1.0


def test_benchmark_is_deterministic(planted, tmp_path):
    config = BenchmarkConfig(kinds=("MR", "SET"), ip_max_len=5, seed=9)
    paths = []
    for run in ("a", "b"):
        report = run_benchmark(planted, config)
        p = tmp_path / run
        p.mkdir()
        report.write_csv(p / "report.csv")
        report.write_json(p / "report.json")
        paths.append(p)
    for name in ("report.csv", "report.json"):
        assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes()
    doc = json.loads((paths[0] / "report.json").read_text())
    assert "auc_definition" in doc["metadata"]


def test_cells_without_features_are_reported():
    # at full support only "a" survives; it is useless, so cells still complete
    log = make_log(["ab", "ac", "ad", "ae", "af", "ag"] * 2, [0] * 6 + [1] * 6)
    config = BenchmarkConfig(kinds=("IP", "TR"), k_folds=2, selection=SelectionConfig(min_support=1.0))
    report = run_benchmark(log, config)
    assert len(report.cells) == 2 * 2 * 2
    assert all(c.accuracy is not None for c in report.rows("IP", "tree"))
    assert all(c.error == "no features selected" for c in report.rows("TR", "knn"))
