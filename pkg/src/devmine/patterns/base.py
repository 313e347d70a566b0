"""Feature definitions and their per-trace counting semantics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from ..log_model import ActivityDictionary, EventLog, Trace


class Kind(str, Enum):
    IA = "IA"
    TR = "TR"
    TRA = "TRA"
    MR = "MR"
    MRA = "MRA"
    IP = "IP"
    SET = "SET"

    def __str__(self) -> str:
        return self.value


ALL_KINDS = tuple(Kind)


def count_substring(pattern: Sequence[int], seq: Sequence[int]) -> int:
    """Occurrences of ``pattern`` as a contiguous block, overlaps included."""
    m = len(pattern)
    pattern = tuple(pattern)
    seq = tuple(seq)
    return sum(1 for i in range(len(seq) - m + 1) if seq[i:i + m] == pattern)


def count_embeddings(pattern: Sequence[int], seq: Sequence[int]) -> int:
    """Leftmost non-overlapping gap-allowed embeddings of ``pattern``.

    Matching is greedy: each symbol binds to its earliest occurrence after
    the previous one, and a completed embedding restarts the scan right after
    its last event. Greedy earliest-end is optimal for disjoint spans.
    """
    if not pattern:
        return 0
    count, j, m = 0, 0, len(pattern)
    for s in seq:
        if s == pattern[j]:
            j += 1
            if j == m:
                count += 1
                j = 0
    return count


def is_subsequence(pattern: Sequence[int], seq: Sequence[int]) -> bool:
    it = iter(seq)
    return all(any(s == p for s in it) for p in pattern)


@dataclass(frozen=True)
class SequencePattern:
    kind: Kind
    symbols: tuple[int, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("sequence pattern needs at least one symbol")
        if self.kind not in (Kind.IA, Kind.TR, Kind.MR, Kind.IP):
            raise ValueError(f"{self.kind} is not a sequence kind")
        if self.kind is Kind.IA and len(self.symbols) != 1:
            raise ValueError("IA patterns have exactly one symbol")

    @property
    def matching(self) -> str:
        return {Kind.IA: "single", Kind.IP: "gap_allowed"}.get(self.kind, "contiguous")

    def count(self, seq: Sequence[int]) -> int:
        if self.kind is Kind.IA:
            return sum(1 for s in seq if s == self.symbols[0])
        if self.kind is Kind.IP:
            return count_embeddings(self.symbols, seq)
        return count_substring(self.symbols, seq)

    def describe(self, activities: ActivityDictionary) -> str:
        return " ".join(activities.name(s) for s in self.symbols)

    def to_json(self, activities: ActivityDictionary) -> dict:
        return {"symbols": [activities.name(s) for s in self.symbols]}


@dataclass(frozen=True)
class AlphabetPattern:
    kind: Kind
    alphabet: frozenset[int]
    members: tuple[SequencePattern, ...]

    def __post_init__(self):
        if self.kind not in (Kind.TRA, Kind.MRA):
            raise ValueError(f"{self.kind} is not an alphabet kind")
        if not self.members:
            raise ValueError("alphabet pattern needs members")
        for m in self.members:
            if frozenset(m.symbols) != self.alphabet:
                raise ValueError(f"member {m.symbols} does not match alphabet {set(self.alphabet)}")

    def count(self, seq: Sequence[int]) -> int:
        return sum(count_substring(m.symbols, seq) for m in self.members)

    def describe(self, activities: ActivityDictionary) -> str:
        return "{" + ", ".join(sorted(activities.name(s) for s in self.alphabet)) + "}"

    def to_json(self, activities: ActivityDictionary) -> dict:
        return {
            "alphabet": sorted(activities.name(s) for s in self.alphabet),
            "members": [[activities.name(s) for s in m.symbols] for m in self.members],
        }


@dataclass(frozen=True)
class ItemsetPattern:
    items: frozenset[int]
    kind: Kind = Kind.SET

    def __post_init__(self):
        if not self.items:
            raise ValueError("itemset must be non-empty")

    def count(self, seq: Sequence[int]) -> int:
        # Min over item counts; equals the IA count for singletons.
        counts = {i: 0 for i in self.items}
        for s in seq:
            if s in counts:
                counts[s] += 1
        return min(counts.values())

    def describe(self, activities: ActivityDictionary) -> str:
        return "{" + ", ".join(sorted(activities.name(s) for s in self.items)) + "}"

    def to_json(self, activities: ActivityDictionary) -> dict:
        return {"items": sorted(activities.name(s) for s in self.items)}


Pattern = Union[SequencePattern, AlphabetPattern, ItemsetPattern]


@dataclass(frozen=True)
class FeatureDefinition:
    id: int
    pattern: Pattern
    trace_support: float

    @property
    def kind(self) -> Kind:
        return self.pattern.kind

    def describe(self, activities: ActivityDictionary) -> str:
        return self.pattern.describe(activities)


def feature_count(feature: FeatureDefinition | Pattern, trace: Trace | Sequence[int]) -> int:
    pattern = feature.pattern if isinstance(feature, FeatureDefinition) else feature
    seq = trace.symbols if isinstance(trace, Trace) else trace
    return pattern.count(seq)


def trace_support(pattern: Pattern, sequences: Sequence[Sequence[int]]) -> float:
    """Fraction of sequences in which the pattern occurs at least once."""
    if not sequences:
        return 0.0
    return sum(1 for s in sequences if pattern.count(s) > 0) / len(sequences)


def name_key(activities: ActivityDictionary):
    """Sort key over symbol tuples by activity name.

    Ordering by name rather than by id keeps miner output independent of
    the order in which activities happen to appear in the input file.
    """
    return lambda symbols: tuple(activities.name(s) for s in symbols)


def min_count(min_support: float, n: int) -> int:
    """Smallest trace count meeting a fractional support threshold."""
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must lie in (0, 1], got {min_support}")
    # Tolerate float noise such as 0.1 * 30 = 3.0000000000000004.
    return max(1, math.ceil(min_support * n - 1e-9))


def number(features: Iterable[tuple[Pattern, float]]) -> list[FeatureDefinition]:
    return [FeatureDefinition(i, p, s) for i, (p, s) in enumerate(features)]


def feature_to_json(feature: FeatureDefinition, activities: ActivityDictionary) -> dict:
    record = {"id": feature.id, "kind": str(feature.kind)}
    record.update(feature.pattern.to_json(activities))
    record["trace_support"] = feature.trace_support
    return record


def write_jsonl(features: Sequence[FeatureDefinition], activities: ActivityDictionary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in features:
            fh.write(json.dumps(feature_to_json(f, activities), sort_keys=True) + "\n")


def feature_from_json(record: dict, activities: ActivityDictionary) -> FeatureDefinition:
    kind = Kind(record["kind"])
    enc = lambda names: tuple(activities.id_of(n) for n in names)  # noqa: E731
    if kind in (Kind.IA, Kind.TR, Kind.MR, Kind.IP):
        pattern: Pattern = SequencePattern(kind, enc(record["symbols"]))
    elif kind in (Kind.TRA, Kind.MRA):
        base = Kind.TR if kind is Kind.TRA else Kind.MR
        members = tuple(SequencePattern(base, enc(m)) for m in record["members"])
        pattern = AlphabetPattern(kind, frozenset(enc(record["alphabet"])), members)
    else:
        pattern = ItemsetPattern(frozenset(enc(record["items"])))
    return FeatureDefinition(record["id"], pattern, record["trace_support"])


def read_jsonl(path, activities: ActivityDictionary) -> list[FeatureDefinition]:
    with open(path, encoding="utf-8") as fh:
        return [feature_from_json(json.loads(line), activities) for line in fh if line.strip()]


def value_matrix(features: Sequence[FeatureDefinition], log: EventLog):
    """Traces x features array of feature counts."""
    seqs = log.sequences
    out = np.zeros((len(seqs), len(features)), dtype=float)
    for j, f in enumerate(features):
        for i, s in enumerate(seqs):
            out[i, j] = f.pattern.count(s)
    return out
