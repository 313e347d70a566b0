# coding: utf-8

# # From a decision tree to rules
#
# A tree trained on the selected features is read back as one rule per leaf.
# Each rule is then judged with seven interestingness measures computed from
# its contingency table.

# %%

from devmine.classifiers import train_decision_tree, vectorize
from devmine.feature_selection import SelectionConfig, score_features, select_by_coverage
from devmine.patterns import mine
from devmine.rules import MEASURES, ContingencyCounts, cumulative_curve, extract_rules, interestingness, rule_measures, ruleset_stats
from devmine.synthgen import SynthSpec, generate

log = generate(SynthSpec(n_traces=200, seed=0))
feats = mine(log, "MR", 0.25)
chosen = select_by_coverage(score_features(feats, log), log, SelectionConfig())
data = vectorize(log, [s.feature for s in chosen])
tree = train_decision_tree(data)
rules = extract_rules(tree)

for r in rules:
    print(r.render(rules.feature_names), f"[{r.n_deviant} deviant, {r.n_normal} normal]")

# %%

stats = ruleset_stats(rules, len(data))
print(stats)

# %%

for rule, (counts, mv) in zip(rules, rule_measures(rules, data)):
    print(rule.id, counts, {k: round(v, 3) for k, v in mv.as_dict().items()})

# ## A hand-checkable table
#
# With 100 traces, 40 matching the rule, 50 deviant and 30 both:

# %%

mv = interestingness(ContingencyCounts(100, 40, 50, 30))
print({k: round(mv.get(k), 5) for k in MEASURES})

# Cumulative curves add rule values from the best rule down.

# %%

print(cumulative_curve(rules, data, "phi"))
