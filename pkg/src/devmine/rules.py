"""Rules read off decision-tree paths and objective interestingness measures."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .classifiers import DecisionTreeModel, FeatureVectorDataset, Leaf, Split
from .log_model import ClassLabel

MEASURES = ("CS", "TWS", "phi", "PS", "OR", "YuleQ", "IG")

# Values used when a measure's formula divides by zero.
SENTINELS = {
    "phi/TWS/IG": "0 when P(A) or P(B) is 0 or 1",
    "IG": "-inf when P(AB) = 0 with non-degenerate marginals (TWS is then 0)",
    "OR": "+inf (YuleQ 1) for x/0 with x > 0; 1 (YuleQ 0) for 0/0",
    "CS": "+inf when P(A,~B) + P(~A,B) = 0 or P(A)P(B) + P(~A)P(~B) = 0",
}


@dataclass(frozen=True)
class Selector:
    feature: int
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in ("<=", ">"):
            raise ValueError(f"unknown operator {self.op!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("selector threshold must be finite")

    def holds(self, value: float) -> bool:
        return value <= self.threshold if self.op == "<=" else value > self.threshold


@dataclass(frozen=True)
class Interval:
    """Merged bounds ``lower < x <= upper`` on one feature."""

    feature: int
    lower: float = -math.inf
    upper: float = math.inf

    def holds(self, value: float) -> bool:
        return self.lower < value <= self.upper


@dataclass(frozen=True)
class Rule:
    id: int
    antecedent: tuple[Selector, ...]
    consequent: ClassLabel
    n_normal: int = 0
    n_deviant: int = 0

    def intervals(self) -> list[Interval]:
        bounds: dict[int, list[float]] = {}
        for s in self.antecedent:
            lo, hi = bounds.setdefault(s.feature, [-math.inf, math.inf])
            if s.op == "<=":
                bounds[s.feature][1] = min(hi, s.threshold)
            else:
                bounds[s.feature][0] = max(lo, s.threshold)
        return [Interval(f, lo, hi) for f, (lo, hi) in bounds.items()]

    @property
    def length(self) -> int:
        return len(self.intervals())

    def covers(self, row) -> bool:
        return all(s.holds(row[s.feature]) for s in self.antecedent)

    def render(self, names: Sequence[str] = ()) -> str:
        parts = []
        for iv in self.intervals():
            name = f'"{names[iv.feature]}"' if names else f"f{iv.feature}"
            if iv.lower > -math.inf and iv.upper < math.inf:
                parts.append(f"{iv.lower:.3f} < {name} <= {iv.upper:.3f}")
            elif iv.lower > -math.inf:
                parts.append(f"{name} > {iv.lower:.3f}")
            else:
                parts.append(f"{name} <= {iv.upper:.3f}")
        cond = " AND ".join(parts) if parts else "TRUE"
        return f"IF {cond} THEN {self.consequent}"


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    feature_names: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    @property
    def degenerate(self) -> bool:
        """A single-leaf tree yields one rule with an empty antecedent."""
        return len(self.rules) == 1 and not self.rules[0].antecedent


def extract_rules(model: DecisionTreeModel) -> RuleSet:
    """One rule per leaf, left branches first."""
    rules: list[Rule] = []

    def walk(node, path):
        if isinstance(node, Leaf):
            rules.append(Rule(len(rules), tuple(path), node.label, node.n_normal, node.n_deviant))
            return
        assert isinstance(node, Split)
        walk(node.left, path + [Selector(node.feature, "<=", node.threshold)])
        walk(node.right, path + [Selector(node.feature, ">", node.threshold)])

    walk(model.root, [])
    return RuleSet(tuple(rules), model.feature_names)


@dataclass(frozen=True)
class RuleSetStats:
    rule_count: int
    mean_length: float
    percent_generalization: float


def percent_generalization(n_rules: int, training_size: int) -> float:
    return (1 - n_rules / training_size) * 100


def ruleset_stats(rules: RuleSet | Sequence[Rule], training_size: int) -> RuleSetStats:
    if training_size < 1:
        raise ValueError("training_size must be at least 1")
    rules = list(rules)
    mean_len = sum(r.length for r in rules) / len(rules) if rules else 0.0
    return RuleSetStats(len(rules), mean_len, percent_generalization(len(rules), training_size))


@dataclass(frozen=True)
class ContingencyCounts:
    N: int
    nA: int
    nB: int
    nAB: int

    def __post_init__(self):
        if not 0 <= self.nAB <= min(self.nA, self.nB) <= max(self.nA, self.nB) <= self.N:
            raise ValueError(f"inconsistent contingency counts {self}")
        if self.N - self.nA - self.nB + self.nAB < 0:
            raise ValueError(f"inconsistent contingency counts {self}")

    @property
    def pA(self) -> float:
        return self.nA / self.N

    @property
    def pB(self) -> float:
        return self.nB / self.N

    @property
    def pAB(self) -> float:
        return self.nAB / self.N

    @property
    def pNotANotB(self) -> float:
        return (self.N - self.nA - self.nB + self.nAB) / self.N

    @property
    def pANotB(self) -> float:
        return (self.nA - self.nAB) / self.N

    @property
    def pNotAB(self) -> float:
        return (self.nB - self.nAB) / self.N

    @property
    def pNotA(self) -> float:
        return (self.N - self.nA) / self.N

    @property
    def pNotB(self) -> float:
        return (self.N - self.nB) / self.N


def contingency(rule: Rule, data: FeatureVectorDataset) -> ContingencyCounts:
    a = np.array([rule.covers(row) for row in data.X], dtype=bool)
    b = np.asarray(data.deviant, dtype=bool)
    if rule.consequent is ClassLabel.NORMAL:
        b = ~b
    return ContingencyCounts(len(b), int(a.sum()), int(b.sum()), int((a & b).sum()))


@dataclass(frozen=True)
class MeasureVector:
    CS: float
    TWS: float
    phi: float
    PS: float
    OR: float
    YuleQ: float
    IG: float

    def get(self, name: str) -> float:
        if name not in MEASURES:
            raise KeyError(f"unknown measure {name!r}; expected one of {MEASURES}")
        return getattr(self, name)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def interestingness(c: ContingencyCounts) -> MeasureVector:
    """All seven measures of ``A => B`` from a contingency table.

    The probability formulas are evaluated in their equivalent integer-cell
    form (``a = nAB``, ``b = nA - nAB``, ``c = nB - nAB``, ``d`` the rest), so
    each value is one correctly rounded ratio of integers. That keeps signs
    exact and makes every measure invariant under scaling all cells.
    Collective strength uses the joint ``P(~A,~B)`` for the bad-events term.
    """
    if c.N < 1:
        raise ValueError("contingency table needs N >= 1")
    N, nA, nB = c.N, c.nA, c.nB
    a = c.nAB
    b = nA - a
    cc = nB - a
    d = N - nA - nB + a

    cross = N * a - nA * nB  # N^2 * (P(AB) - P(A)P(B))
    ps = cross / (N * N)

    if nA in (0, N) or nB in (0, N):
        phi = tws = ig = 0.0
    else:
        spread = nA * nB * (N - nA) * (N - nB)
        phi = math.copysign(math.sqrt(cross * cross / spread), cross) if cross else 0.0
        if a == 0:
            ig, tws = -math.inf, 0.0
        else:
            ig = math.log2((N * a) / (nA * nB)) if cross else 0.0
            tws = (a / N) * ig

    ad, bc = a * d, b * cc
    if bc > 0:
        odds = ad / bc
    else:
        odds = math.inf if ad > 0 else 1.0
    yule = (ad - bc) / (ad + bc) if ad + bc > 0 else 0.0

    good_expected = nA * nB + (N - nA) * (N - nB)  # N^2 * (P(A)P(B) + P(~A)P(~B))
    if good_expected == 0 or b + cc == 0:
        cs = math.inf
    else:
        cs = ((a + d) * (N * N - good_expected)) / (good_expected * (b + cc))

    return MeasureVector(CS=cs, TWS=tws, phi=phi, PS=ps, OR=odds, YuleQ=yule, IG=ig)


def rule_measures(rules: RuleSet, data: FeatureVectorDataset) -> list[tuple[ContingencyCounts, MeasureVector]]:
    out = []
    for r in rules:
        c = contingency(r, data)
        out.append((c, interestingness(c)))
    return out


def cumulative_curve(rules: RuleSet, data: FeatureVectorDataset, measure: str) -> list[tuple[int, float]]:
    """Running sum of ``measure`` over rules sorted from highest to lowest value."""
    if measure not in MEASURES:
        raise KeyError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    values = [(mv.get(measure), r.id) for r, (_, mv) in zip(rules, rule_measures(rules, data))]
    return cumulative_values(values)


def cumulative_values(values: Sequence[tuple[float, int]]) -> list[tuple[int, float]]:
    """``(value, rule id)`` pairs to ``(1-based index, prefix sum)`` points."""
    ordered = sorted(values, key=lambda v: (-v[0], v[1]))
    out, total = [], 0.0
    for i, (v, _) in enumerate(ordered, start=1):
        total += v
        out.append((i, total))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_ruleset_csv(
    rules: RuleSet, data: FeatureVectorDataset, training_size: int, path
) -> None:
    """Stats header lines, then one row per rule with its coverage and measures."""
    stats = ruleset_stats(rules, training_size)
    n = len(data)
    n_dev = int(np.sum(data.deviant))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["# rule_count", stats.rule_count])
        w.writerow(["# mean_length", _fmt(stats.mean_length)])
        w.writerow(["# percent_generalization", _fmt(stats.percent_generalization)])
        w.writerow(["# degenerate", int(rules.degenerate)])
        for k, v in SENTINELS.items():
            w.writerow([f"# sentinel {k}", v])
        w.writerow(
            ["rule_id", "antecedent", "consequent", "length", "coverage",
             "coverage_pct_all", "coverage_pct_class", *MEASURES]
        )
        for r, (c, mv) in zip(rules, rule_measures(rules, data)):
            class_size = n_dev if r.consequent is ClassLabel.DEVIANT else n - n_dev
            w.writerow([
                r.id,
                r.render(rules.feature_names),
                str(r.consequent),
                r.length,
                c.nA,
                _fmt(100 * c.nA / n) if n else "",
                _fmt(100 * c.nAB / class_size) if class_size else "",
                *(_fmt(mv.get(m)) for m in MEASURES),
            ])


def write_curve_csv(curve: Sequence[tuple[int, float]], measure: str, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rules", f"cumulative_{measure}"])
        for i, v in curve:
            w.writerow([i, _fmt(v)])
