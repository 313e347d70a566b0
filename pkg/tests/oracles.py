"""Brute-force reference implementations used to check the fast miners.

Nothing here imports the code under test.
"""

from __future__ import annotations

from itertools import combinations


def brute_tandem_repeats(sequences):
    """Primitive words w with w^k (k >= 2) somewhere, by checking every (start, length, k)."""

    def primitive(w):
        n = len(w)
        return not any(n % d == 0 and w == w[:d] * (n // d) for d in range(1, n))

    words = set()
    for seq in sequences:
        seq = tuple(seq)
        n = len(seq)
        for start in range(n):
            for length in range(1, n // 2 + 1):
                w = seq[start:start + length]
                if len(w) < length:
                    break
                k = 2
                while start + k * length <= n:
                    if seq[start:start + k * length] == w * k and primitive(w):
                        words.add(w)
                    k += 1
    return words


def contains_substring(seq, w):
    seq, w = tuple(seq), tuple(w)
    return any(seq[i:i + len(w)] == w for i in range(len(seq) - len(w) + 1))


def brute_maximal_repeats(sequences):
    """Substrings occurring >= 2 times with >= 2 left and >= 2 right contexts.

    Trace starts and ends are contexts unique to their trace.
    """
    occ = {}
    for t, seq in enumerate(sequences):
        seq = tuple(seq)
        n = len(seq)
        for i in range(n):
            for j in range(i + 1, n + 1):
                left = seq[i - 1] if i > 0 else ("start", t)
                right = seq[j] if j < n else ("end", t)
                occ.setdefault(seq[i:j], []).append((left, right))
    out = set()
    for w, ctx in occ.items():
        if len(ctx) >= 2 and len({c[0] for c in ctx}) >= 2 and len({c[1] for c in ctx}) >= 2:
            out.add(w)
    return out


def brute_itemsets(transactions, need):
    alphabet = sorted(set().union(*map(set, transactions))) if transactions else []
    out = {}
    sets = [set(t) for t in transactions]
    for r in range(1, len(alphabet) + 1):
        for combo in combinations(alphabet, r):
            c = sum(1 for t in sets if set(combo) <= t)
            if c >= need:
                out[frozenset(combo)] = c
    return out


def contains_subsequence(seq, pattern):
    """Exhaustive check: try every index combination."""
    seq = list(seq)
    for idx in combinations(range(len(seq)), len(pattern)):
        if all(seq[i] == p for i, p in zip(idx, pattern)):
            return True
    return False


def max_disjoint_embeddings(seq, pattern):
    """Largest number of embeddings whose [first, last] spans do not overlap."""
    seq = list(seq)
    spans = sorted(
        {(idx[0], idx[-1]) for idx in combinations(range(len(seq)), len(pattern))
         if all(seq[i] == p for i, p in zip(idx, pattern))}
    )
    best = 0

    def search(pos, last_end, count):
        nonlocal best
        best = max(best, count)
        for k in range(pos, len(spans)):
            if spans[k][0] > last_end:
                search(k + 1, spans[k][1], count + 1)

    search(0, -1, 0)
    return best


def pairwise_auc(scores, positive):
    pos = [s for s, p in zip(scores, positive) if p]
    neg = [s for s, p in zip(scores, positive) if not p]
    wins = 0.0
    for a in pos:
        for b in neg:
            wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))
