"""tplab: numerical laboratory for trace Poincare inequalities and
subexponential matrix concentration, exact on finite reversible Markov
chains and Monte Carlo on Gaussian models."""

from .errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    DomainError,
    LabError,
    ModelError,
    NumericError,
)
from .spectral import (
    ScalarFnSpec,
    SpectralDecomposition,
    apply_spectral_fn,
    dilate,
    eigh,
    intdim,
    op_norm,
    psd_order_leq,
    symmetrize,
    trace_fn,
)
from .models import (
    FiniteChain,
    FiniteField,
    GaussianChaos,
    GaussianSeries,
    SmoothField,
    chain_from_graph,
    chain_from_json,
    chaos_as_field,
    complete_refresh_chain,
    constant_field,
    product_chain,
    series_as_field,
    two_state_chain,
)
from .energy import (
    EnergyReport,
    SymmetrizedPair,
    bivariate_symmetrized,
    carre_finite,
    carre_product_formula,
    carre_smooth,
    carre_table,
    dirichlet_form,
    energy_report,
    matrix_variance,
    variance_proxy,
)
from .poincare import (
    PoincareCertificate,
    ProbeReport,
    check_scalar_poincare,
    check_trace_poincare,
    equivalence_probe,
    ou_certificate,
    poincare_constant,
    user_certificate,
)
from .montecarlo import (
    Estimate,
    SampleSpec,
    estimate_cosh_trace,
    estimate_tail,
    estimate_trace_moment,
    normal_stream,
    sample_standard_normal,
    wilson_interval,
)
from .bounds import (
    UNBOUNDED,
    BoundParams,
    chaos_scalar_bound,
    check_bivariate_poincare,
    check_chain_rule,
    check_chaos_matrix,
    check_chaos_scalar,
    check_exp_moment,
    check_intdim_variant,
    check_mean_value_trace,
    check_poly_moment,
    check_subadditivity,
    check_tail_empirical,
    default_theta_grid,
    exp_moment_rhs,
    expectation_bound,
    poly_moment_rhs,
    tail_bound,
)
from .reports import CheckReport, DEFAULT_SLACK, reports_to_csv, rows_to_csv, rows_to_json

__version__ = "0.1.0"
