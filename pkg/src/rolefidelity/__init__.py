"""Role fidelity metrics for adversarial multi-agent debate pipelines.

The public surface re-exported here covers the record model, the drift
metrics, cohort comparison, the simulator, the classifier harness and the
fact-check consensus rule.
"""
from .analysis import (
    Breakdown,
    CohortFilter,
    ZTestResult,
    breakdown,
    compare_cohorts,
    normal_cdf,
    two_proportion_z,
)
from .classifier import (
    ClassifierVerdict,
    RetryPolicy,
    StubProvider,
    VerdictError,
    build_classifier_prompt,
    classify_batch,
    parse_verdict,
    serialize_verdict,
    stub_classifier,
)
from .consensus import ClaimItem, ConsolidatedReport, FactCheckRun, consolidate, contradiction_stats, match_claims
from .metrics import (
    ConfusionMatrix,
    EmptyCohortError,
    MetricsSummary,
    accuracy,
    confusion_matrix,
    ddi,
    edd,
    ers_per_statement,
    ers_pooled,
    metrics_summary,
    rdi,
)
from .model import Cohort, DimensionScores, Role, RunRecord, SchemaError, StatementRef, load_cohort
from .simulator import EroProfile, estimate_profile, paper_profile_charitable, paper_profile_critical, simulate_cohort

__version__ = "0.1.0"
