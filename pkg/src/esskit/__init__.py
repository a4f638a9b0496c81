"""esskit: effective sample size toolkit for treatment-effect priors.

Computes the prior and posterior expected-local-information-ratio ESS when
Bayesian borrowing is performed on the treatment-effect scale, for normal
and binomial endpoints, with prior-elicitation fitting, posterior updating,
and Monte Carlo predictive-consistency checks.
"""

__version__ = "0.1.0"

from .engine import EssResult, conjugate_ess, density_grid, ess_binomial, ess_normal
from .errors import (
    BoundaryCountsError,
    ConvergenceError,
    EsskitError,
    EstimationError,
    IntegrationError,
    SingularityError,
    UnreliablePriorError,
    UnsupportedMeasureError,
    ValidationError,
)
from .inference import (
    FitResult,
    NormalSummary,
    TwoArmBinomialData,
    fit_counts,
    fit_two_arm,
    posterior_bvn,
    posterior_ess,
    posterior_normal,
)
from .measures import (
    EffectMeasure,
    MeasureKind,
    ProbPair,
    RandomizationRatio,
    iu_variance,
    jacobian_abs,
    joint_prob_density,
    probs_from_params,
)
from .numerics import (
    BivariateNormalParams,
    IntegrationResult,
    QuadratureConfig,
    UnivariateNormal,
    bvn_density,
    gauss_legendre_rule,
    integrate_rect,
)
from .simlab import (
    ConsistencyReport,
    McVarianceEstimate,
    SimConfig,
    mc_expected_iu_variance,
    predictive_consistency,
    small_sample_ess_logor,
)

__all__ = [
    "__version__",
    "BivariateNormalParams",
    "BoundaryCountsError",
    "ConsistencyReport",
    "ConvergenceError",
    "EffectMeasure",
    "EssResult",
    "EsskitError",
    "EstimationError",
    "FitResult",
    "IntegrationError",
    "IntegrationResult",
    "McVarianceEstimate",
    "MeasureKind",
    "NormalSummary",
    "ProbPair",
    "QuadratureConfig",
    "RandomizationRatio",
    "SimConfig",
    "SingularityError",
    "TwoArmBinomialData",
    "UnivariateNormal",
    "UnreliablePriorError",
    "UnsupportedMeasureError",
    "ValidationError",
    "bvn_density",
    "conjugate_ess",
    "density_grid",
    "ess_binomial",
    "ess_normal",
    "fit_counts",
    "fit_two_arm",
    "gauss_legendre_rule",
    "integrate_rect",
    "iu_variance",
    "jacobian_abs",
    "joint_prob_density",
    "mc_expected_iu_variance",
    "posterior_bvn",
    "posterior_ess",
    "posterior_normal",
    "predictive_consistency",
    "probs_from_params",
    "small_sample_ess_logor",
]
