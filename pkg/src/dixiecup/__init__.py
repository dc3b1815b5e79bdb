"""Coupon-collection times: exact moments, asymptotics, limit law, simulation."""

__version__ = "0.1.0"

from .asymptotics import (
    EULER_GAMMA,
    PI_SQUARED_OVER_6,
    ExpansionReport,
    equal_case_expectation,
    expectation_asymptotic,
    laplace_Ik_expansion,
    laplace_Ik_quadrature,
    rising_moment_asymptotic,
    variance_leading,
)
from .exact import (
    ConvergenceFailure,
    MomentReport,
    QuadratureConfig,
    deficiency,
    expectation_exact,
    partial_sum_exp,
    rising_moment_exact,
    survival_probability_integrand,
    variance_exact,
)
from .families import (
    CouponDistribution,
    CouponFamily,
    NormalizerExpansion,
    build_distribution,
    equal_family,
    explicit_family,
    load_weights_file,
    log_zipf_family,
    normalizer_asymptotic,
    normalizer_exact,
    weight,
    zipf_family,
)
from .gumbel import (
    GumbelNormalization,
    equal_case_limit_probability,
    equal_normalization,
    gumbel_cdf,
    gumbel_normalization,
    lambda_N,
    limit_probability,
    limit_target_g,
    neal_normalization,
    printed_example_normalization,
)
from .oracles import (
    StateSpaceTooLarge,
    SubsetSpaceTooLarge,
    ccdf_exact,
    expectation_oracle_inclusion_exclusion,
    expectation_oracle_markov,
    harmonic_number,
    rising_moment_oracle_markov,
    variance_oracle_markov,
)
from .simulate import (
    AliasTable,
    KsReport,
    SimulationStall,
    SimulationSummary,
    ks_distance_to_gumbel,
    run_simulation,
    sample_trial,
)
