"""Fisher scoring and coverage-based feature selection."""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .log_model import ActivityDictionary, EventLog
from .patterns import FeatureDefinition, value_matrix


@dataclass(frozen=True)
class ScoredFeature:
    feature: FeatureDefinition
    fisher: float


@dataclass(frozen=True)
class SelectionConfig:
    min_support: float = 0.25
    coverage_threshold: float = 5

    def __post_init__(self):
        if not 0 < self.min_support <= 1:
            raise ValueError(f"min_support must lie in (0, 1], got {self.min_support}")
        if self.coverage_threshold < 1:
            raise ValueError("coverage_threshold must be at least 1")


def _moments(values: np.ndarray):
    """Exact (n, sum, sum of squares), as ints when the values are integral."""
    if np.all(np.isfinite(values)) and np.all(values == np.round(values)) and \
            (values.size == 0 or np.abs(values).max() < 2 ** 20):
        ints = values.astype(np.int64)
        return ints.size, int(ints.sum()), int((ints * ints).sum())
    vals = [Fraction(float(v)) for v in values]
    return len(vals), sum(vals, Fraction(0)), sum((v * v for v in vals), Fraction(0))


def fisher_score(positive: Sequence[float], negative: Sequence[float]) -> float:
    """Two-class Fisher score ``(mu+ - mu-)^2 / (var+ + var-)``.

    Variances are population variances. A zero denominator gives ``inf`` when
    the means differ and 0 when they agree. The ratio is formed in exact
    arithmetic, so equal scores compare equal and scaling every value by a
    common constant cannot reorder ties.
    """
    pos = np.asarray(positive, dtype=float)
    neg = np.asarray(negative, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("Fisher score needs both classes to be non-empty")
    n1, s1, q1 = _moments(pos)
    n0, s0, q0 = _moments(neg)
    # both sides scaled by n1^2 n0^2
    gap = (s1 * n0 - s0 * n1) ** 2
    spread = n0 * n0 * (q1 * n1 - s1 * s1) + n1 * n1 * (q0 * n0 - s0 * s0)
    if spread == 0:
        return math.inf if gap > 0 else 0.0
    return float(Fraction(gap) / Fraction(spread))


def fisher_scores(values: np.ndarray, deviant: Sequence[bool]) -> np.ndarray:
    """Column-wise Fisher scores of a traces x features matrix."""
    mask = np.asarray(deviant, dtype=bool)
    return np.array([fisher_score(values[mask, j], values[~mask, j]) for j in range(values.shape[1])])


def score_features(
    features: Sequence[FeatureDefinition], log: EventLog, values: np.ndarray | None = None
) -> list[ScoredFeature]:
    if values is None:
        values = value_matrix(features, log)
    scores = fisher_scores(values, log.deviant_mask()) if features else []
    return [ScoredFeature(f, float(s)) for f, s in zip(features, scores)]


def rank(scored: Sequence[ScoredFeature]) -> list[ScoredFeature]:
    """Descending score (``inf`` first), ties by ascending feature id."""
    return sorted(scored, key=lambda s: (-s.fisher, s.feature.id))


def select_by_coverage(
    scored: Sequence[ScoredFeature],
    log: EventLog,
    config: SelectionConfig = SelectionConfig(),
    values: Mapping[int, Sequence[float]] | None = None,
) -> list[ScoredFeature]:
    """Scan features from best to worst, keeping those that cover an active trace.

    Each trace counts how many kept features cover it; once the count exceeds
    the coverage threshold the trace stops being checked. ``values`` may map
    feature id to per-trace counts to avoid recounting.
    """
    seqs = log.sequences
    cover = np.zeros(len(seqs), dtype=np.int64)
    active = np.ones(len(seqs), dtype=bool)
    chosen = []
    for sf in rank(scored):
        if not active.any():
            break
        if values is not None:
            col = np.asarray(values[sf.feature.id], dtype=float)
        else:
            col = np.array([sf.feature.pattern.count(s) for s in seqs], dtype=float)
        hit = active & (col > 0)
        if not hit.any():
            continue
        chosen.append(sf)
        cover[hit] += 1
        active &= cover <= config.coverage_threshold
    return chosen


def write_selection_csv(
    selected: Sequence[ScoredFeature], activities: ActivityDictionary, path
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature_id", "kind", "pattern", "fisher_score", "trace_support"])
        for r, sf in enumerate(selected, start=1):
            f = sf.feature
            w.writerow([r, f.id, str(f.kind), f.describe(activities), repr(sf.fisher), repr(f.trace_support)])
