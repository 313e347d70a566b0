"""Gap-allowed sequential patterns mined by prefix extension."""

from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict

from ..log_model import EventLog
from .base import FeatureDefinition, Kind, SequencePattern, min_count, number

DEFAULT_MAX_LEN = 15


def mine_iterative_patterns(
    log: EventLog, min_support: float = 0.25, max_len: int = DEFAULT_MAX_LEN
) -> list[FeatureDefinition]:
    """Frequent gap-allowed subsequences of length ``1..max_len``.

    Each trace is projected onto the earliest end position of the current
    prefix; an extension by symbol ``c`` jumps to the first ``c`` after that
    position. Trace support is anti-monotone under extension, so infrequent
    prefixes are pruned. Patterns come out in depth-first order with
    extensions tried in ascending activity name.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    seqs = log.sequences
    n = len(seqs)
    if n == 0:
        return []
    need = min_count(min_support, n)

    positions = []
    for seq in seqs:
        pos = defaultdict(list)
        for i, s in enumerate(seq):
            pos[s].append(i)
        positions.append(dict(pos))

    found: list[tuple[SequencePattern, float]] = []

    def grow(prefix: tuple[int, ...], projection: list[tuple[int, int]]) -> None:
        if len(prefix) == max_len:
            return
        nxt: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for t, end in projection:
            for sym, occ in positions[t].items():
                k = bisect_right(occ, end)
                if k < len(occ):
                    nxt[sym].append((t, occ[k]))
        for sym in sorted(nxt, key=log.activities.name):
            proj = nxt[sym]
            if len(proj) >= need:
                pattern = prefix + (sym,)
                found.append((SequencePattern(Kind.IP, pattern), len(proj) / n))
                grow(pattern, proj)

    grow((), [(t, -1) for t in range(n)])
    return number(found)
