"""Agent-based simulator of work-time allocation under social norms.

Agents split a fixed working day between production, cooperation, and
shirking by sampling from triangular distributions centered near shared
descriptive norms. Value types, management stance, and pay-for-performance
schemes shift the distribution modes; norms track realized behavior, so
group conduct and beliefs co-evolve over the run.
"""

from .behavior import (
    BehaviorProfile,
    ManagementStance,
    TimeAllocation,
    ValueType,
    allocate_time,
    cooperation_distribution,
    deviation_bounds,
    profile_for,
    shirking_distribution,
)
from .distributions import Triangular, make_triangular, mean, pdf, sample, sample_array
from .engine import (
    ENVIRONMENTS,
    SCENARIOS,
    TYPE_NAMES,
    DiagnosticError,
    MetricsSeries,
    ModelParams,
    ModelState,
    ReplicateResult,
    ScenarioConfig,
    average_series,
    init_model,
    run_matrix,
    run_replicates,
    run_single,
    scenario,
    step,
    type_quotas,
)
from .norms import (
    GridTopology,
    NormState,
    make_grid,
    sample_peer_matrix,
    update_global,
    update_neighbours,
    update_random,
)
from .production import (
    mean_coop_others,
    mean_coop_others_array,
    optimal_group_output,
    output,
    pct_ogo,
)
from .rewards import RewardParams, bonus, bonus_array, cumulative_labor_cost, reward
from .sweeps import (
    DIST_SETTINGS,
    SWEEP_DIMENSIONS,
    EnvSimilarityResult,
    EnvSimilarityRow,
    HVarianceReport,
    KappaContrast,
    SweepResult,
    SweepRow,
    SweepSpec,
    dist_label,
    environment_similarity,
    h_variance_report,
    kappa_output_contrast,
    run_sweep,
    similarity_from_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distributions
    "Triangular",
    "make_triangular",
    "pdf",
    "sample",
    "sample_array",
    "mean",
    # behavior
    "ValueType",
    "ManagementStance",
    "BehaviorProfile",
    "TimeAllocation",
    "profile_for",
    "deviation_bounds",
    "shirking_distribution",
    "cooperation_distribution",
    "allocate_time",
    # norms
    "NormState",
    "GridTopology",
    "make_grid",
    "sample_peer_matrix",
    "update_global",
    "update_neighbours",
    "update_random",
    # production
    "mean_coop_others",
    "mean_coop_others_array",
    "output",
    "optimal_group_output",
    "pct_ogo",
    # rewards
    "RewardParams",
    "bonus",
    "bonus_array",
    "reward",
    "cumulative_labor_cost",
    # engine
    "ENVIRONMENTS",
    "SCENARIOS",
    "TYPE_NAMES",
    "ScenarioConfig",
    "ModelParams",
    "MetricsSeries",
    "ModelState",
    "ReplicateResult",
    "DiagnosticError",
    "scenario",
    "type_quotas",
    "init_model",
    "step",
    "run_single",
    "run_replicates",
    "run_matrix",
    "average_series",
    # sweeps
    "DIST_SETTINGS",
    "SWEEP_DIMENSIONS",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "EnvSimilarityRow",
    "EnvSimilarityResult",
    "environment_similarity",
    "similarity_from_matrix",
    "HVarianceReport",
    "h_variance_report",
    "KappaContrast",
    "kappa_output_contrast",
    "dist_label",
]
