"""Active learning with outcome-dependent query costs: only negatives cost.

The package provides auditors for thresholds on [0,1] and for disjunctions of
coordinate thresholds (axis-aligned rectangles via a folding reduction), a
greedy query planner for finite hypothesis classes under general
outcome-dependent costs with an exact small-instance optimum oracle, seeded
synthetic generators, active/passive baselines, and a CLI experiment harness.
"""
from .baselines import PassiveResult, binary_search_active, passive_erm
from .core import (
    AuditOracle,
    BudgetExhausted,
    ConstantHypothesis,
    CostLedger,
    Hypothesis,
    LabeledExample,
    Point,
    Pool,
    SampleSizeConfig,
    error_rate,
    load_pool_csv,
    negative_error_rate,
    sample_size_absolute,
    sample_size_relative,
    save_pool_csv,
    version_space_member,
    version_space_slack,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    compare_reports,
    run_experiment,
)
from .generators import (
    CirclePairs,
    CirclePool,
    NoisyDisjunction,
    NoisyThreshold,
    SeededSampler,
    circle_pool,
    gen_circle_pairs,
    gen_noisy_disjunction,
    gen_noisy_threshold,
)
from .greedy import (
    CostSpec,
    Dominance,
    FiniteClassTable,
    GreedyIdentifyResult,
    ModelMisspecificationError,
    QueryTranscript,
    dominance,
    greedy_identify,
    greedy_select,
    opt_cost_bruteforce,
    version_space,
)
from .rectangles import (
    DisjunctionHypothesis,
    RectangleAuditResult,
    audit_disjunction_agnostic,
    audit_disjunction_realizable,
    disjunction_erm,
    map_to_orthant,
    max_negative_error_over_version_space,
    outside_negative_violations,
)
from .thresholds import (
    SubsetSelection,
    ThresholdAuditResult,
    ThresholdHypothesis,
    audit_threshold_agnostic,
    audit_threshold_pool,
    audit_threshold_realizable,
    representative_subset,
    threshold_erm,
)

__version__ = "0.1.0"

__all__ = [
    "AuditOracle",
    "BudgetExhausted",
    "CirclePairs",
    "CirclePool",
    "ConfigError",
    "ConstantHypothesis",
    "CostLedger",
    "CostSpec",
    "DisjunctionHypothesis",
    "Dominance",
    "ExperimentConfig",
    "ExperimentReport",
    "FiniteClassTable",
    "GreedyIdentifyResult",
    "Hypothesis",
    "LabeledExample",
    "ModelMisspecificationError",
    "NoisyDisjunction",
    "NoisyThreshold",
    "PassiveResult",
    "Point",
    "Pool",
    "QueryTranscript",
    "RectangleAuditResult",
    "SampleSizeConfig",
    "SeededSampler",
    "SubsetSelection",
    "ThresholdAuditResult",
    "ThresholdHypothesis",
    "audit_disjunction_agnostic",
    "audit_disjunction_realizable",
    "audit_threshold_agnostic",
    "audit_threshold_pool",
    "audit_threshold_realizable",
    "binary_search_active",
    "circle_pool",
    "compare_reports",
    "disjunction_erm",
    "dominance",
    "error_rate",
    "gen_circle_pairs",
    "gen_noisy_disjunction",
    "gen_noisy_threshold",
    "greedy_identify",
    "greedy_select",
    "load_pool_csv",
    "map_to_orthant",
    "max_negative_error_over_version_space",
    "negative_error_rate",
    "opt_cost_bruteforce",
    "passive_erm",
    "representative_subset",
    "run_experiment",
    "sample_size_absolute",
    "sample_size_relative",
    "save_pool_csv",
    "threshold_erm",
    "version_space",
    "version_space_member",
    "version_space_slack",
]
