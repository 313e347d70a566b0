"""Deviance mining for labeled business process event logs.

Mine sequence, alphabet and set features from traces, keep the most
discriminative ones by Fisher score, train explainable classifiers and
measure both accuracy and the interestingness of the extracted rules.
"""

__version__ = "0.1.0"

from .classifiers import (  # noqa: E402
    DecisionTreeModel,
    FeatureVectorDataset,
    KnnConfig,
    Prediction,
    TreeParams,
    knn_predict,
    predict_tree,
    train_decision_tree,
    vectorize,
)
from .evaluation import (  # noqa: E402
    BenchmarkConfig,
    ConfusionMatrix,
    EvalReport,
    FoldPlan,
    oversample,
    run_benchmark,
    score,
    stratified_kfold,
)
from .feature_selection import (  # noqa: E402
    ScoredFeature,
    SelectionConfig,
    fisher_score,
    score_features,
    select_by_coverage,
)
from .log_model import (  # noqa: E402
    ActivityDictionary,
    ClassLabel,
    Event,
    EventLog,
    FormatConfig,
    LabelingSpec,
    LogStats,
    Trace,
    compute_log_stats,
    label_traces,
    parse_event_log,
    write_event_log,
)
from .patterns import FeatureDefinition, Kind, feature_count, mine  # noqa: E402
from .rules import (  # noqa: E402
    ContingencyCounts,
    MeasureVector,
    Rule,
    RuleSet,
    contingency,
    cumulative_curve,
    extract_rules,
    interestingness,
    ruleset_stats,
)
from .synthgen import SynthSpec, generate  # noqa: E402
