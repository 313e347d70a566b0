"""Synthetic labeled logs with a planted deviant pattern.

Deviant traces carry the planted activity sequence; normal traces carry
none of it or, with ``activity_count_matched``, the same activities in an
order that never forms it. Filler activities are drawn from the rest of the
alphabet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Mapping, Sequence

import numpy as np

from .log_model import ActivityDictionary, ClassLabel, Event, EventLog, Trace
from .patterns import count_substring, is_subsequence

OUTCOME_COLUMN = "label"
_EPOCH = datetime(2020, 1, 1, tzinfo=timezone.utc)


class ImpossibleSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_traces: int = 200
    alphabet_size: int = 8
    mean_length: float = 10.0
    seed: int = 0
    planted_pattern: tuple[str, ...] = ("a5", "a6", "a7")
    placement: str = "contiguous"
    deviant_fraction: float = 0.5
    activity_count_matched: bool = True
    max_retries: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "planted_pattern", tuple(self.planted_pattern))
        if self.n_traces < 2:
            raise ValueError("n_traces must be at least 2")
        if self.placement not in ("contiguous", "gapped"):
            raise ValueError(f"placement must be 'contiguous' or 'gapped', got {self.placement!r}")
        if not self.planted_pattern:
            raise ValueError("planted_pattern must be non-empty")
        unknown = set(self.planted_pattern) - set(self.alphabet)
        if unknown:
            raise ValueError(f"pattern symbols {sorted(unknown)} are not in the alphabet")
        if len(self.planted_pattern) > self.mean_length:
            raise ImpossibleSpecError("planted pattern is longer than the mean trace length")
        if not 0 < self.deviant_fraction < 1:
            raise ValueError("deviant_fraction must lie strictly between 0 and 1")

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(f"a{i}" for i in range(self.alphabet_size))

    @classmethod
    def from_dict(cls, d: Mapping) -> "SynthSpec":
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _place(rng, filler: list[int], block: Sequence[int], placement: str) -> list[int]:
    if placement == "contiguous":
        at = int(rng.integers(0, len(filler) + 1))
        return filler[:at] + list(block) + filler[at:]
    total = len(filler) + len(block)
    slots = set(int(i) for i in rng.choice(total, size=len(block), replace=False))
    out, fi, bi = [], iter(filler), iter(block)
    for i in range(total):
        out.append(next(bi) if i in slots else next(fi))
    return out


def _forms_pattern(seq: Sequence[int], pattern: Sequence[int], placement: str) -> bool:
    if placement == "contiguous":
        # a gap-allowed occurrence would also leak the pattern to sequence miners
        return count_substring(pattern, seq) > 0 or is_subsequence(pattern, seq)
    return is_subsequence(pattern, seq)


def generate(spec: SynthSpec) -> EventLog:
    rng = np.random.default_rng(spec.seed)
    activities = ActivityDictionary(spec.alphabet)
    pattern = [activities.id_of(a) for a in spec.planted_pattern]
    filler_symbols = [i for i in range(len(activities)) if i not in set(pattern)]
    if not filler_symbols and (spec.mean_length > len(pattern) or not spec.activity_count_matched):
        raise ImpossibleSpecError("no filler activities left outside the planted pattern")

    n_dev = int(round(spec.n_traces * spec.deviant_fraction))
    n_norm = spec.n_traces - n_dev
    if n_dev == 0 or n_norm == 0:
        raise ImpossibleSpecError("both classes need at least one trace")
    if spec.activity_count_matched and n_dev != n_norm:
        raise ImpossibleSpecError("matched activity counts need equally sized classes")

    filler_mean = spec.mean_length - len(pattern)

    def filler(length: int) -> list[int]:
        if not filler_symbols:
            return []
        return [filler_symbols[i] for i in rng.integers(0, len(filler_symbols), size=length)]

    lengths = [int(x) for x in rng.poisson(filler_mean, size=n_dev)] if filler_symbols else [0] * n_dev
    deviant_seqs = [_place(rng, filler(n), pattern, spec.placement) for n in lengths]

    if spec.activity_count_matched:
        # Redistribute the deviant fillers among the normal traces so each
        # activity has the same class total without pairing traces one to one.
        pool = [s for n, seq in zip(lengths, deviant_seqs) for s in seq if s not in set(pattern)]
        pool = [int(x) for x in rng.permutation(pool)]
        normal_lengths = [int(x) for x in rng.permutation(lengths)]
        normal_seqs, pos = [], 0
        for n in normal_lengths:
            part = pool[pos:pos + n]
            pos += n
            for _ in range(spec.max_retries):
                block = [pattern[i] for i in rng.permutation(len(pattern))]
                seq = _place(rng, part, block, spec.placement)
                if not _forms_pattern(seq, pattern, spec.placement):
                    break
            else:
                raise ImpossibleSpecError("could not reorder the pattern symbols to avoid the pattern")
            normal_seqs.append(seq)
    else:
        normal_lengths = [max(1, int(x)) for x in rng.poisson(spec.mean_length, size=n_norm)]
        normal_seqs = [filler(n) for n in normal_lengths]

    labelled = [(seq, ClassLabel.DEVIANT) for seq in deviant_seqs]
    labelled += [(seq, ClassLabel.NORMAL) for seq in normal_seqs]
    order = rng.permutation(len(labelled))

    width = len(str(spec.n_traces))
    traces = []
    for case_no, k in enumerate(order):
        seq, label = labelled[k]
        start = _EPOCH + timedelta(hours=case_no)
        events = tuple(Event(s, start + timedelta(minutes=i)) for i, s in enumerate(seq))
        traces.append(Trace(f"case{case_no:0{width}d}", events, label, {OUTCOME_COLUMN: str(label)}))
    return EventLog(tuple(traces), activities)
