"""Feature families mined from event logs.

Every miner takes an encoded :class:`~devmine.log_model.EventLog` and a
minimum trace support and returns densely numbered
:class:`FeatureDefinition` objects in a deterministic order.
"""

from __future__ import annotations

from collections import Counter

from ..log_model import EventLog
from .base import (
    ALL_KINDS,
    AlphabetPattern,
    FeatureDefinition,
    ItemsetPattern,
    Kind,
    Pattern,
    SequencePattern,
    count_embeddings,
    count_substring,
    feature_count,
    feature_from_json,
    feature_to_json,
    is_subsequence,
    min_count,
    name_key,
    number,
    read_jsonl,
    trace_support,
    value_matrix,
    write_jsonl,
)
from .itemsets import fp_growth, mine_itemsets
from .iterative import DEFAULT_MAX_LEN, mine_iterative_patterns
from .repeats import (
    alphabet_classes,
    is_primitive,
    maximal_repeats,
    mine_alphabet_maximal_repeats,
    mine_alphabet_tandem_repeats,
    mine_maximal_repeats,
    mine_tandem_repeats,
    tandem_repeats,
)


def mine_individual_activities(log: EventLog, min_support: float = 0.25) -> list[FeatureDefinition]:
    seqs = log.sequences
    n = len(seqs)
    if n == 0:
        return []
    need = min_count(min_support, n)
    hits = Counter(a for s in seqs for a in set(s))
    return number(
        (SequencePattern(Kind.IA, (a,)), hits[a] / n)
        for a in sorted(hits, key=log.activities.name) if hits[a] >= need
    )


def mine(
    log: EventLog, kind: Kind | str, min_support: float = 0.25, ip_max_len: int = DEFAULT_MAX_LEN
) -> list[FeatureDefinition]:
    """Dispatch to the miner for one feature family."""
    kind = Kind(kind)
    if kind is Kind.IP:
        return mine_iterative_patterns(log, min_support, ip_max_len)
    miner = {
        Kind.IA: mine_individual_activities,
        Kind.TR: mine_tandem_repeats,
        Kind.TRA: mine_alphabet_tandem_repeats,
        Kind.MR: mine_maximal_repeats,
        Kind.MRA: mine_alphabet_maximal_repeats,
        Kind.SET: mine_itemsets,
    }[kind]
    return miner(log, min_support)


__all__ = [
    "ALL_KINDS", "AlphabetPattern", "DEFAULT_MAX_LEN", "FeatureDefinition", "ItemsetPattern",
    "Kind", "Pattern", "SequencePattern", "alphabet_classes", "count_embeddings",
    "count_substring", "feature_count", "feature_from_json", "feature_to_json", "fp_growth",
    "is_primitive", "is_subsequence", "maximal_repeats", "min_count", "mine",
    "mine_alphabet_maximal_repeats", "mine_alphabet_tandem_repeats", "mine_individual_activities",
    "mine_itemsets", "mine_iterative_patterns", "mine_maximal_repeats", "mine_tandem_repeats",
    "name_key", "number", "read_jsonl", "tandem_repeats", "trace_support", "value_matrix", "write_jsonl",
]
