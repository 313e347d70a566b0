# coding: utf-8

# # Event logs and class labels
#
# A log is a CSV of events. Rows sharing a case id form one trace, ordered by
# timestamp. Before any mining happens every trace gets a label, either from
# how long the case took or from an outcome column.

# %%

import tempfile
from datetime import timedelta
from pathlib import Path

from devmine.log_model import (
    FormatConfig,
    LabelingSpec,
    compute_log_stats,
    label_traces,
    parse_event_log,
)

workdir = Path(tempfile.mkdtemp())
csv_path = workdir / "claims.csv"
csv_path.write_text(
    "case_id,activity,timestamp,outcome\n"
    "C1,register,2021-03-01T09:00:00,accepted\n"
    "C1,check,2021-03-01T09:30:00,accepted\n"
    "C1,pay,2021-03-01T10:00:00,accepted\n"
    "C2,register,2021-03-01T09:10:00,rejected\n"
    "C2,check,2021-03-01T11:00:00,rejected\n"
    "C2,check,2021-03-01T13:30:00,rejected\n"
    "C2,reject,2021-03-01T14:00:00,rejected\n"
    "C3,register,2021-03-02T08:00:00,accepted\n"
    "C3,pay,2021-03-02T08:20:00,accepted\n"
)

log = parse_event_log(csv_path, FormatConfig(outcome="outcome"))
for trace in log:
    print(trace.case_id, log.describe(trace.symbols), trace.duration())

# Activity names are encoded as dense integers in order of first appearance.

# %%

print(log.activities)

# ## Temporal labeling
#
# A case is deviant when it runs longer than the threshold. A case that
# finishes exactly at the threshold counts as normal.

# %%

slow = LabelingSpec("temporal", duration_threshold=timedelta(minutes=180), deviant_when="above")
by_time = label_traces(log, slow)
print([(t.case_id, str(t.label)) for t in by_time])

# ## Outcome labeling
#
# The outcome column travels with each trace as an attribute.

# %%

rejected = LabelingSpec("outcome", outcome_attribute="outcome", deviant_value="rejected")
by_outcome = label_traces(log, rejected)
print([(t.case_id, str(t.label)) for t in by_outcome])

# %%

for name, value in compute_log_stats(by_outcome).as_rows():
    print(f"{name:>28}: {value}")
