"""Phase-transition bounds and Monte Carlo checks for spiked Gaussian tensors."""

from .montecarlo import (
    BbpSummary,
    ExperimentConfig,
    ExperimentResult,
    NormEstimate,
    PowerIterationSettings,
    SupportTooLargeError,
    TrialRecord,
    bbp_reference_experiment,
    detection_experiment,
    injective_norm_estimate,
    map_statistic,
    mle_statistic,
    overlap_tail_experiment,
    recovery_experiment,
)
from .rates import (
    OverlapTailOracle,
    RateFunction,
    binary_entropy,
    collision_entropy,
    entropy_term_G,
    exact_overlap_tail,
    local_subgaussian_sigma2,
    multi_entropy,
    overlap_tail_oracle,
    rate_function_for,
    rate_rademacher,
    rate_sparse_rademacher,
    rate_spherical,
)
from .replica import (
    GaussQuadrature,
    ReplicaSolution,
    q_of_mu_rademacher,
    rademacher_fixed_points,
    rademacher_free_energy,
    rademacher_replica_thresholds,
    spherical_appearance_snr,
    spherical_fixed_points,
    spherical_replica_threshold,
)
from .rng import RngSeed
from .tensors import (
    MemoryCapError,
    SpikePrior,
    SymmetricTensor,
    UnitVector,
    contract,
    rank_one,
    rank_one_inner,
    sample_spike,
    sample_spiked,
    sample_wigner,
    symmetrize,
)
from .thresholds import (
    ThresholdReport,
    asymptotics,
    collision_entropy_cap,
    injective_norm_mu,
    lower_bound_lambda,
    spherical_tangency,
    spiked_norm_lower_Ld,
    threshold_report,
    upper_bound_cardinality,
    upper_bound_entropy,
    upper_bound_spherical,
)

__version__ = "0.1.0"
