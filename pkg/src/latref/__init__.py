"""Prime-lattice CVP refinement with fixed-angle QAOA, at desk scale."""

from .analysis import (
    AlphaDepthFit,
    ExperimentConfig,
    RefinementRecord,
    extrapolate_alpha_p,
    fit_records,
    heatmap_p1,
    quality_metric,
    run_scaling_experiment,
)
from .encoding import (
    CostDiagonal,
    QuboCoefficients,
    Refinement,
    build_diagonal,
    compute_kappa,
    cost,
    normalize_diagonal,
    prepare_refinement,
    to_qubo_coefficients,
)
from .factoring import (
    FactorConfig,
    FactorOutcome,
    SrPair,
    check_sr_pair,
    epsilon_of,
    extract_factors,
    factor_demo,
    gf2_nullspace,
    smooth_factor,
    vector_to_uv,
)
from .lattice import (
    BabaiResult,
    FactorBase,
    GsoData,
    PrimeLatticeInstance,
    ReducedBasis,
    babai_nearest_plane,
    build_factor_base,
    build_prime_lattice,
    dimension_for_bits,
    enumerate_neighborhood,
    exact_cvp_small,
    gram_schmidt,
    lll_reduce,
    minkowski_rd_diagnostics,
    sample_semiprime,
)
from .pretrain import (
    InstanceDistribution,
    ScalingFit,
    TrainConfig,
    baseline_per_instance,
    baseline_single_instance,
    fit_alpha,
    nelder_mead,
    pretrain,
    train_angles_on_instance,
    validate_angles,
)
from .qaoa import (
    AngleSchedule,
    best_solution_probability,
    dense_oracle,
    expectation,
    outcome_probabilities,
    refinement_probability,
    run_qaoa,
)

__all__ = [name for name in dir() if not name.startswith("_")]
