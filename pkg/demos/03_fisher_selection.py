# coding: utf-8

# # Scoring and selecting features
#
# Features are ranked by Fisher score, the squared gap between class means
# over the summed class variances. Selection walks down the ranking and keeps
# a feature only while it still covers some trace that has not been covered
# too often.

# %%

import math

from devmine.feature_selection import SelectionConfig, fisher_score, rank, score_features, select_by_coverage
from devmine.patterns import mine
from devmine.synthgen import SynthSpec, generate

print(fisher_score([1, 1], [0, 0]))  # constant classes that differ
print(fisher_score([1, 0], [0, 0]))
print(fisher_score([2, 0], [2, 0]))

# %%

log = generate(SynthSpec(n_traces=120, seed=7))
feats = mine(log, "IP", 0.25, ip_max_len=5)
scored = rank(score_features(feats, log))
print(len(feats), "IP features mined")
for sf in scored[:5]:
    print(f"{sf.fisher:>8.3f}  {sf.feature.describe(log.activities)}")

# The planted sequence separates the classes perfectly, so its score is
# infinite and it leads the ranking.

# %%

for theta in (1, 5, math.inf):
    chosen = select_by_coverage(scored, log, SelectionConfig(coverage_threshold=theta))
    print(f"theta={theta}: kept {len(chosen)} of {len(scored)}")
