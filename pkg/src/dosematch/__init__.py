"""Optimal full matching for continuous treatment doses.

Forms subclassifications of units by solving a minimum-cost edge-cover
problem through general-graph minimum-weight matching, scores match quality
with homogeneity and balance measures, and tests dose-response hypotheses
with a within-set randomization test.
"""

from .cover import (
    CardinalityPenalty,
    build_mirror_graph,
    extract_cover,
    full_match,
    full_match_via_mirror,
    star_reduce,
)
from .distances import (
    DistanceMatrix,
    DosePenaltyConfig,
    UnitTable,
    apply_dose_penalty,
    mahalanobis_matrix,
)
from .errors import DoseMatchError
from .graph import EdgeCover, Matching, WeightedGraph, cover_cost, validate_graph
from .homogeneity import (
    HomogeneityReport,
    Measure,
    WeightingScheme,
    balance_ss,
    brute_force_optimum,
    mean_pairwise_distance,
    mu_dose,
    nu,
    nu_star,
    nu_star_min,
    prematch_balance_ss,
    report,
    weighted_measure,
)
from .inference import (
    Alternative,
    ClusteredStudy,
    TestResult,
    aggregate_clusters,
    double_rank_statistic,
    randomization_test,
)
from .matching import MatchingResult, min_weight_perfect_matching, optimal_pair_match
from .simulation import (
    DoseModel,
    EstimatorSummary,
    SimulationConfig,
    estimate_beta_reg,
    estimate_beta_reg_match,
    generate_dataset,
    run_factorial,
    run_pair_vs_full,
)
from .subclassification import Subclass, Subclassification

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "WeightedGraph",
    "Matching",
    "EdgeCover",
    "validate_graph",
    "cover_cost",
    "MatchingResult",
    "min_weight_perfect_matching",
    "optimal_pair_match",
    "CardinalityPenalty",
    "build_mirror_graph",
    "extract_cover",
    "star_reduce",
    "full_match",
    "full_match_via_mirror",
    "UnitTable",
    "DistanceMatrix",
    "DosePenaltyConfig",
    "mahalanobis_matrix",
    "apply_dose_penalty",
    "Subclass",
    "Subclassification",
    "WeightingScheme",
    "Measure",
    "HomogeneityReport",
    "nu",
    "nu_star",
    "nu_star_min",
    "weighted_measure",
    "mu_dose",
    "balance_ss",
    "prematch_balance_ss",
    "mean_pairwise_distance",
    "brute_force_optimum",
    "report",
    "Alternative",
    "ClusteredStudy",
    "TestResult",
    "aggregate_clusters",
    "double_rank_statistic",
    "randomization_test",
    "DoseModel",
    "SimulationConfig",
    "EstimatorSummary",
    "generate_dataset",
    "estimate_beta_reg",
    "estimate_beta_reg_match",
    "run_factorial",
    "run_pair_vs_full",
    "DoseMatchError",
]
