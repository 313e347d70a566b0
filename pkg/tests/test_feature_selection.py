import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devmine.feature_selection import (
    ScoredFeature,
    SelectionConfig,
    fisher_score,
    rank,
    score_features,
    select_by_coverage,
    write_selection_csv,
)
from devmine.patterns import FeatureDefinition, Kind, SequencePattern, mine
from helpers import ids, make_log


def oracle_fisher(pos, neg):
    """Fisher score from plain sums, population variances."""
    mp, mn = sum(pos) / len(pos), sum(neg) / len(neg)
    vp = sum((x - mp) ** 2 for x in pos) / len(pos)
    vn = sum((x - mn) ** 2 for x in neg) / len(neg)
    if vp + vn == 0:
        return math.inf if mp != mn else 0.0
    return (mp - mn) ** 2 / (vp + vn)


def test_fisher_separated_constant_classes():
    assert fisher_score([1, 1], [0, 0]) == math.inf


def test_fisher_equal_means():
    assert fisher_score([1, 0], [1, 0]) == 0


def test_fisher_worked_value():
    assert fisher_score([1, 0], [0, 0]) == pytest.approx(1.0, abs=1e-12)


def test_fisher_needs_both_classes():
    with pytest.raises(ValueError):
        fisher_score([], [1])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=12),
       st.lists(st.integers(0, 6), min_size=1, max_size=12))
def test_fisher_matches_oracle(pos, neg):
    got, want = fisher_score(pos, neg), oracle_fisher(pos, neg)
    assert got >= 0
    if math.isinf(want):
        assert got == want
    else:
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def _features(log, words):
    return [FeatureDefinition(i, SequencePattern(Kind.IP, ids(log, w)), 1.0)
            for i, w in enumerate(words)]


def test_theta_one_three_identical_features_one_trace():
    log = make_log(["ab"], [1])
    feats = _features(log, ["a", "a", "a"])
    scored = [ScoredFeature(f, s) for f, s in zip(feats, [3.0, 2.0, 1.0])]
    chosen = select_by_coverage(scored, log, SelectionConfig(coverage_threshold=1))
    assert [c.feature.id for c in chosen] == [0, 1]


def test_single_covering_feature_is_selected():
    log = make_log(["ab", "ba", "a"], [0, 1, 1])
    scored = [ScoredFeature(_features(log, ["a"])[0], 0.5)]
    assert select_by_coverage(scored, log) == scored


def test_non_covering_feature_never_selected():
    log = make_log(["ab", "ba"], [0, 1])
    feats = _features(log, ["a", "c"])
    scored = [ScoredFeature(feats[1], math.inf), ScoredFeature(feats[0], 0.1)]
    assert [c.feature.id for c in select_by_coverage(scored, log)] == [0]


def test_infinite_scores_rank_first_ties_by_id():
    log = make_log(["a"], [1])
    f = _features(log, ["a"] * 4)
    scored = [ScoredFeature(f[0], 1.0), ScoredFeature(f[3], math.inf),
              ScoredFeature(f[2], 5.0), ScoredFeature(f[1], math.inf)]
    assert [s.feature.id for s in rank(scored)] == [1, 3, 2, 0]


def test_config_validation():
    with pytest.raises(ValueError):
        SelectionConfig(min_support=0)
    with pytest.raises(ValueError):
        SelectionConfig(coverage_threshold=0)


logs = st.lists(
    st.tuples(st.text("abcd", min_size=1, max_size=8), st.booleans()), min_size=2, max_size=12
).filter(lambda rows: len({d for _, d in rows}) == 2)


def _setup(rows):
    log = make_log([t for t, _ in rows], [d for _, d in rows])
    feats = mine(log, Kind.IP, 0.25, ip_max_len=3)
    return log, feats


@settings(max_examples=60, deadline=None)
@given(logs, st.integers(1, 4))
def test_selection_is_ordered_subsequence_covering_active_traces(rows, theta):
    log, feats = _setup(rows)
    scored = score_features(feats, log)
    ranked = rank(scored)
    chosen = select_by_coverage(scored, log, SelectionConfig(coverage_threshold=theta))
    positions = [ranked.index(c) for c in chosen]
    assert positions == sorted(positions)
    # replay: each selected feature hit an active trace at its turn
    cover = [0] * len(log)
    for c in chosen:
        hits = [i for i, s in enumerate(log.sequences)
                if cover[i] <= theta and c.feature.pattern.count(s) > 0]
        assert hits
        for i in hits:
            cover[i] += 1


@settings(max_examples=60, deadline=None)
@given(logs)
def test_infinite_theta_keeps_every_covering_feature(rows):
    log, feats = _setup(rows)
    scored = score_features(feats, log)
    chosen = select_by_coverage(scored, log, SelectionConfig(coverage_threshold=math.inf))
    covering = {f.id for f in feats if any(f.pattern.count(s) for s in log.sequences)}
    assert {c.feature.id for c in chosen} == covering


@settings(max_examples=60, deadline=None)
@given(logs, st.sampled_from([0.5, 2.0, 7.0]))
def test_common_scaling_keeps_selection(rows, c):
    log, feats = _setup(rows)
    X = np.array([[f.pattern.count(s) for f in feats] for s in log.sequences], dtype=float)
    X = X.reshape(len(log), len(feats))
    base = score_features(feats, log, X)
    scaled = score_features(feats, log, X * c)
    cols = {f.id: X[:, j] for j, f in enumerate(feats)}
    scols = {f.id: X[:, j] * c for j, f in enumerate(feats)}
    a = select_by_coverage(base, log, values=cols)
    b = select_by_coverage(scaled, log, values=scols)
    assert [s.feature.id for s in a] == [s.feature.id for s in b]


def test_selection_csv(tmp_path):
    log = make_log(["ab", "ba"], [0, 1])
    feats = _features(log, ["ab", "b"])
    scored = [ScoredFeature(feats[0], math.inf), ScoredFeature(feats[1], 0.0)]
    path = tmp_path / "sel.csv"
    write_selection_csv(scored, log.activities, path)
    rows = list(csv.DictReader(path.open()))
    assert [r["rank"] for r in rows] == ["1", "2"]
    assert rows[0]["pattern"] == "a b" and rows[0]["fisher_score"] == "inf"
    assert rows[0]["kind"] == "IP"
