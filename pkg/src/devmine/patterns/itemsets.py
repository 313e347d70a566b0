"""Frequent activity sets via FP-Growth."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

from ..log_model import EventLog
from .base import FeatureDefinition, ItemsetPattern, min_count, name_key, number


class _Node:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children = {}


def _build_tree(weighted: Iterable[tuple[Sequence[int], int]], need: int):
    counts: dict[int, int] = defaultdict(int)
    weighted = list(weighted)
    for items, w in weighted:
        for i in items:
            counts[i] += w
    frequent = {i: c for i, c in counts.items() if c >= need}
    order = {i: r for r, i in enumerate(sorted(frequent, key=lambda i: (-frequent[i], i)))}

    root = _Node(None, None)
    header: dict[int, list[_Node]] = defaultdict(list)
    for items, w in weighted:
        node = root
        for i in sorted((i for i in items if i in order), key=order.__getitem__):
            child = node.children.get(i)
            if child is None:
                child = _Node(i, node)
                node.children[i] = child
                header[i].append(child)
            child.count += w
            node = child
    return header, frequent, order


def fp_growth(transactions: Sequence[Iterable[int]], need: int) -> dict[frozenset, int]:
    """All itemsets contained in at least ``need`` transactions, with counts."""
    out: dict[frozenset, int] = {}

    def mine(weighted, suffix: frozenset) -> None:
        header, frequent, order = _build_tree(weighted, need)
        # least frequent first, so conditional bases stay small
        for item in sorted(frequent, key=order.__getitem__, reverse=True):
            itemset = suffix | {item}
            out[itemset] = frequent[item]
            base = []
            for node in header[item]:
                path = []
                p = node.parent
                while p.item is not None:
                    path.append(p.item)
                    p = p.parent
                if path:
                    base.append((path, node.count))
            if base:
                mine(base, itemset)

    mine([(set(t), 1) for t in transactions], frozenset())
    return out


def mine_itemsets(log: EventLog, min_support: float = 0.25) -> list[FeatureDefinition]:
    """Frequent sets of distinct activities per trace, ordered by (size, items)."""
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must lie in (0, 1], got {min_support}")
    seqs = log.sequences
    n = len(seqs)
    if n == 0:
        return []
    found = fp_growth([set(s) for s in seqs], min_count(min_support, n))
    key = name_key(log.activities)
    keep = sorted(found, key=lambda s: (len(s), sorted(key(s))))
    return number((ItemsetPattern(s), found[s] / n) for s in keep)
