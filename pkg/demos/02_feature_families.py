# coding: utf-8

# # Seven feature families
#
# Each family turns traces into counts of some recurring structure. Here we
# mine all of them from a toy log and look at what comes out.

# %%

from devmine.patterns import ALL_KINDS, mine, value_matrix
from devmine.log_model import ActivityDictionary, ClassLabel, Event, EventLog, Trace


def toy_log(rows):
    acts = ActivityDictionary(sorted({a for seq, _ in rows for a in seq}))
    traces = tuple(
        Trace(f"t{i}", tuple(Event(acts.id_of(a)) for a in seq),
              ClassLabel.DEVIANT if dev else ClassLabel.NORMAL)
        for i, (seq, dev) in enumerate(rows)
    )
    return EventLog(traces, acts)


log = toy_log([
    ("abcabcd", True),
    ("abcabd", True),
    ("acbd", False),
    ("abd", False),
])

# %%

for kind in ALL_KINDS:
    feats = mine(log, kind, min_support=0.5, ip_max_len=4)
    shown = ", ".join(f.describe(log.activities) for f in feats[:8])
    more = f" (+{len(feats) - 8} more)" if len(feats) > 8 else ""
    print(f"{kind!s:>3}: {len(feats):2d} features  {shown}{more}")

# ## Counting
#
# Tandem and maximal repeats count contiguous occurrences. Iterative
# patterns count leftmost non-overlapping embeddings with gaps allowed. An
# itemset counts as often as its rarest member.

# %%

ip = mine(log, "IP", 0.5, ip_max_len=3)
X = value_matrix(ip, log)
names = [f.describe(log.activities) for f in ip]
for trace, row in zip(log, X):
    hits = {n: int(v) for n, v in zip(names, row) if v}
    print(log.describe(trace.symbols), dict(list(hits.items())[:6]))
