"""Tandem and maximal repeats, plus their alphabet classes.

Maximal repeats come from the LCP intervals of a suffix array built over
all traces joined by distinct sentinels; tandem repeats from a per-period
scan of each trace for squares ``ww``.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from ..log_model import EventLog
from .base import (
    AlphabetPattern,
    FeatureDefinition,
    Kind,
    SequencePattern,
    min_count,
    name_key,
    number,
)


def suffix_array(s: Sequence[int]) -> np.ndarray:
    """Suffix array by prefix doubling (O(n log^2 n))."""
    arr = np.asarray(s, dtype=np.int64)
    n = len(arr)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = np.unique(arr, return_inverse=True)[1].astype(np.int64).ravel()
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r, s2 = rank[sa], second[sa]
        step = np.empty(n, dtype=np.int64)
        step[0] = 0
        step[1:] = (r[1:] != r[:-1]) | (s2[1:] != s2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(step)
        rank = new_rank
        if rank.max() == n - 1:
            return sa
        k *= 2


def lcp_array(s: Sequence[int], sa: np.ndarray) -> np.ndarray:
    """Kasai: ``lcp[i]`` is the common prefix length of suffixes ``sa[i-1]`` and ``sa[i]``."""
    n = len(s)
    rank = np.empty(n, dtype=np.int64)
    rank[sa] = np.arange(n)
    lcp = np.zeros(n, dtype=np.int64)
    h = 0
    s = list(s)
    sa_l = sa.tolist()
    for i in range(n):
        r = rank[i]
        if r > 0:
            j = sa_l[r - 1]
            while i + h < n and j + h < n and s[i + h] == s[j + h]:
                h += 1
            lcp[r] = h
            if h > 0:
                h -= 1
        else:
            h = 0
    return lcp


def lcp_intervals(lcp: np.ndarray) -> list[tuple[int, int, int]]:
    """All lcp-intervals ``(length, lb, rb)`` with length > 0."""
    n = len(lcp)
    out = []
    stack = [(0, 0)]
    for i in range(1, n + 1):
        cur = int(lcp[i]) if i < n else 0
        lb = i - 1
        while cur < stack[-1][0]:
            length, lb = stack.pop()
            out.append((length, lb, i - 1))
        if cur > stack[-1][0]:
            stack.append((cur, lb))
    return out


def _join_with_sentinels(sequences: Sequence[Sequence[int]]):
    text: list[int] = [-1]
    owner: list[int] = [-1]
    for t, seq in enumerate(sequences):
        text.extend(seq)
        owner.extend([t] * len(seq))
        text.append(-(t + 2))
        owner.append(-1)
    return text, np.asarray(owner, dtype=np.int64)


def maximal_repeats(sequences: Sequence[Sequence[int]]) -> dict[tuple[int, ...], int]:
    """Maximal repeats of the sentinel-joined log mapped to their trace count.

    A repeat occurs at least twice and has at least two distinct left and two
    distinct right contexts; trace boundaries count as unique contexts.
    """
    text, owner = _join_with_sentinels(sequences)
    sa = suffix_array(text)
    lcp = lcp_array(text, sa)
    # left context of each suffix in SA order; position 0 is the only one without
    prev = np.asarray(text, dtype=np.int64)[np.maximum(sa - 1, 0)]
    prev[sa == 0] = np.iinfo(np.int64).min
    changes = np.zeros(len(sa), dtype=np.int64)
    changes[1:] = prev[1:] != prev[:-1]
    changes = np.cumsum(changes)

    found = {}
    for length, lb, rb in lcp_intervals(lcp):
        if changes[rb] - changes[lb] == 0:
            continue
        start = int(sa[lb])
        word = tuple(text[start:start + length])
        found[word] = len(np.unique(owner[sa[lb:rb + 1]]))
    return found


def is_primitive(word: Sequence[int]) -> bool:
    """True unless ``word`` equals ``u * j`` for some shorter ``u``."""
    w = tuple(word)
    doubled = w + w
    n = len(w)
    return not any(doubled[i:i + n] == w for i in range(1, n))


def tandem_repeat_words(seq: Sequence[int]) -> set[tuple[int, ...]]:
    """Primitive words ``w`` such that ``ww`` occurs contiguously in ``seq``."""
    arr = np.asarray(seq, dtype=np.int64)
    n = len(arr)
    words = set()
    for p in range(1, n // 2 + 1):
        eq = (arr[: n - p] == arr[p:]).astype(np.int64)
        run = np.concatenate(([0], np.cumsum(eq)))
        # square of period p starts at i iff eq[i:i+p] is all ones
        starts = np.nonzero(run[p:] - run[: n - 2 * p + 1] == p)[0]
        for i in starts:
            w = tuple(int(x) for x in arr[i:i + p])
            if w not in words and is_primitive(w):
                words.add(w)
    return words


def _trace_counts(words: Iterable[tuple[int, ...]], sequences) -> dict[tuple[int, ...], int]:
    out = {}
    tuples = [tuple(s) for s in sequences]
    for w in words:
        m = len(w)
        out[w] = sum(
            1 for s in tuples if any(s[i:i + m] == w for i in range(len(s) - m + 1))
        )
    return out


def tandem_repeats(sequences: Sequence[Sequence[int]]) -> dict[tuple[int, ...], int]:
    """All primitive tandem repeat words in the log mapped to their trace count."""
    words = set()
    for seq in sequences:
        words |= tandem_repeat_words(seq)
    return _trace_counts(words, sequences)


def _as_features(kind: Kind, counts: dict, log: EventLog, min_support: float) -> list[FeatureDefinition]:
    n = len(log)
    need = min_count(min_support, n)
    key = name_key(log.activities)
    keep = sorted((w for w, c in counts.items() if c >= need), key=lambda w: (len(w), key(w)))
    return number((SequencePattern(kind, w), counts[w] / n) for w in keep)


def mine_tandem_repeats(log: EventLog, min_support: float = 0.25) -> list[FeatureDefinition]:
    seqs = log.sequences
    return _as_features(Kind.TR, tandem_repeats(seqs), log, min_support)


def mine_maximal_repeats(log: EventLog, min_support: float = 0.25) -> list[FeatureDefinition]:
    seqs = log.sequences
    return _as_features(Kind.MR, maximal_repeats(seqs), log, min_support)


def alphabet_classes(
    patterns: Sequence[SequencePattern | FeatureDefinition],
    kind: Kind | str,
    log: EventLog,
    min_support: float | None = None,
) -> list[FeatureDefinition]:
    """Group TR (for TRA) or MR (for MRA) patterns by their symbol set.

    Class support is the fraction of traces holding at least one member.
    """
    kind = Kind(kind)
    base = {Kind.TRA: Kind.TR, Kind.MRA: Kind.MR}.get(kind)
    if base is None:
        raise ValueError(f"alphabet classes are TRA or MRA, not {kind}")
    groups: dict[frozenset, list[SequencePattern]] = defaultdict(list)
    for p in patterns:
        p = p.pattern if isinstance(p, FeatureDefinition) else p
        if p.kind is not base:
            raise ValueError(f"{kind} classes need {base} patterns, got {p.kind}")
        groups[frozenset(p.symbols)].append(p)

    seqs = log.sequences
    n = len(seqs)
    need = min_count(min_support, n) if min_support is not None else None
    classes = []
    key = name_key(log.activities)
    for alphabet in sorted(groups, key=lambda a: (len(a), sorted(key(a)))):
        members = tuple(sorted(set(groups[alphabet]), key=lambda m: (len(m.symbols), key(m.symbols))))
        pattern = AlphabetPattern(kind, alphabet, members)
        hits = sum(1 for s in seqs if pattern.count(s) > 0)
        if min_support is None or hits >= need:
            classes.append((pattern, hits / n if n else 0.0))
    return number(classes)


def mine_alphabet_tandem_repeats(log: EventLog, min_support: float = 0.25) -> list[FeatureDefinition]:
    words = tandem_repeats(log.sequences)
    return alphabet_classes([SequencePattern(Kind.TR, w) for w in words], Kind.TRA, log, min_support)


def mine_alphabet_maximal_repeats(log: EventLog, min_support: float = 0.25) -> list[FeatureDefinition]:
    words = maximal_repeats(log.sequences)
    return alphabet_classes([SequencePattern(Kind.MR, w) for w in words], Kind.MRA, log, min_support)
