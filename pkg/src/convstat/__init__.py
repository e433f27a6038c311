"""Tests for sums of independent integer-valued random variables.

The central object is the convolution of the per-variable empirical
probability mass vectors: the maximum-likelihood estimate of the
distribution of the sum, usable with unequal per-variable sample sizes.
Wald-type chi-squared tests are built from its singular limiting
covariance, whose rank follows from the shared roots of the variables'
probability generating functions.
"""

from .errors import (
    ConvStatError,
    DegenerateVariable,
    DimensionMismatch,
    DomainError,
    EmptyProduct,
    EmptySample,
    EmptySizes,
    InputError,
    InvalidPMV,
    LatticeViolation,
    ModelDegenerate,
    NeedTwoVariables,
    NoConvergence,
    NotPaired,
    NotSymmetric,
    NumericalError,
    RankOutOfRange,
    SupportMismatch,
    SupportViolation,
    ZeroExpected,
    ZeroInput,
)
from .pmv import (
    EmpiricalPMV,
    PMV,
    conv_matrix,
    convolve,
    convolve_all,
    empirical_pmv,
    multinomial_cov,
)
from .symlin import (
    EigenDecomp,
    chi2_sf,
    eigh,
    ensure_symmetric,
    pinv,
    quad_form,
    rank_r_approx,
)
from .polyrank import (
    GcdResult,
    RankReport,
    covariance_rank,
    gcd_degree,
    gcd_many,
    leave_one_out,
)
from .covest import (
    psi,
    psi_hat,
    upsilon_hat,
    weights_from_sizes,
    xi,
    xi_hat,
)
from .hyptest import (
    CanonicalSamples,
    SampleSet,
    TestReport,
    canonicalize,
    ed_test,
    gof_test,
    oracle_statistics,
    paired_sums,
    pearson_ed,
    pearson_gof,
    subind_test,
)
from .simlab import (
    ALL_STATISTICS,
    SimResult,
    SimScenario,
    StatResult,
    rejection_proportion,
    run_scenario,
    sample_scenario,
    sweep,
    z_rho,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_STATISTICS",
    "CanonicalSamples",
    "ConvStatError",
    "DegenerateVariable",
    "DimensionMismatch",
    "DomainError",
    "EigenDecomp",
    "EmpiricalPMV",
    "EmptyProduct",
    "EmptySample",
    "EmptySizes",
    "GcdResult",
    "InputError",
    "InvalidPMV",
    "LatticeViolation",
    "ModelDegenerate",
    "NeedTwoVariables",
    "NoConvergence",
    "NotPaired",
    "NotSymmetric",
    "NumericalError",
    "PMV",
    "RankOutOfRange",
    "RankReport",
    "SampleSet",
    "SimResult",
    "SimScenario",
    "StatResult",
    "SupportMismatch",
    "SupportViolation",
    "TestReport",
    "ZeroExpected",
    "ZeroInput",
    "canonicalize",
    "chi2_sf",
    "conv_matrix",
    "convolve",
    "convolve_all",
    "covariance_rank",
    "ed_test",
    "eigh",
    "empirical_pmv",
    "ensure_symmetric",
    "gcd_degree",
    "gcd_many",
    "gof_test",
    "leave_one_out",
    "multinomial_cov",
    "oracle_statistics",
    "paired_sums",
    "pearson_ed",
    "pearson_gof",
    "pinv",
    "psi",
    "psi_hat",
    "quad_form",
    "rank_r_approx",
    "rejection_proportion",
    "run_scenario",
    "sample_scenario",
    "subind_test",
    "sweep",
    "upsilon_hat",
    "weights_from_sizes",
    "xi",
    "xi_hat",
    "z_rho",
]
