"""Porcupine networks: two-layer relu networks with line-constrained weights.

The package provides exact population risks for matched and mismatched
line configurations, Monte Carlo oracles for every closed form, loss
landscape region analysis, Schur-complement approximation bounds,
angular-net minimax bounds, and a seeded projected-SGD trainer.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConfigMismatch,
    CoverageNotReached,
    DimensionMismatch,
    Diverged,
    DomainError,
    DuplicateLine,
    InfeasibleWeights,
    NegativeMass,
    NotSymmetric,
    ParameterOutOfRange,
    PorcupineError,
    PreconditionViolated,
    SingularKernel,
    SingularProjector,
    SingularStructure,
    TooManyCollisions,
    ZeroColumn,
    ZeroVector,
)
from .kernel import (
    KernelBundle,
    equiangular_2d,
    kernel_bundle,
    min_eigenvalue,
    psi,
    psi_apply,
    spectral_norm,
    symmetric_pseudo_inverse,
)
from .landscape import (
    GOOD_REGION,
    MAY_HAVE_BAD_LOCAL,
    NO_OPTIMA,
    ONLY_BAD_LOCAL,
    ONLY_GLOBAL,
    GlobalOptimumCheck,
    RegionClassification,
    analytic_gradient,
    bad_region_loss,
    bad_region_stationary,
    bad_region_z,
    classify_region,
    global_optimum_check,
    good_region_probability,
    region_condition,
    scalar_hessian,
    scalar_region_classify,
    stationarity_check,
)
from .lines import (
    LineSet,
    NeuronLineMap,
    PNNWeights,
    RegionSignature,
    build_line_set,
    canonicalize_vector,
    cross_gram,
    decompose_weights,
    load_line_set,
    load_vectors_csv,
    random_line_set,
    save_line_set,
    save_vectors_csv,
    signature_from_matrix,
    weights_from_columns,
    weights_from_masses,
)
from .minimax import (
    AngularNet,
    ReluGap,
    coverage_gap,
    greedy_angular_net,
    load_angular_net,
    minimax_risk_bound,
    nearest_net_approx,
    net_size_bound,
    relu_gap,
    sparse_net_size,
)
from .risk import (
    RiskBreakdown,
    degree_one_risk,
    matched_risk,
    mismatched_risk,
    monte_carlo_risk,
    network_output,
    pairwise_population_risk,
    scalar_risk,
    truncated_covariance,
)
from .schur import (
    AsymptoticReference,
    BadLocalBound,
    NearestSubset,
    SchurReport,
    add_line_update,
    asymptotic_reference,
    bad_local_asymptotic_bound,
    good_local_loss,
    nearest_line_subset,
    normalized_loss_bound,
    perturbation_bound,
    schur_complement,
    structured_inverse,
)
from .trainer import (
    BAD_LOCAL,
    GLOBAL,
    NOT_CONVERGED,
    MatchedSummary,
    MismatchedSummary,
    OutcomeReport,
    TrainConfig,
    TrainResult,
    axes_line_set,
    classify_outcome,
    degree_one_map,
    desk_matched_config,
    desk_mismatched_config,
    experiment_matched_degree_one,
    experiment_mismatched_random,
    full_scale_matched_config,
    full_scale_mismatched_config,
    generate_dataset,
    init_random_pnn,
    sgd_train,
)
