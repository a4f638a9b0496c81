import pytest

from esskit import BivariateNormalParams, EffectMeasure, QuadratureConfig, RandomizationRatio


@pytest.fixture
def ratio_21():
    return RandomizationRatio(2, 1)


@pytest.fixture
def mean_diff_unit():
    return EffectMeasure.mean_difference(1.0, 1.0)


@pytest.fixture
def rd():
    return EffectMeasure.risk_difference()


@pytest.fixture
def logor():
    return EffectMeasure.log_odds_ratio()


@pytest.fixture
def logrr():
    return EffectMeasure.log_risk_ratio()


@pytest.fixture
def rd_prior_03():
    """Moderately informative risk-difference prior centered at 0.3."""
    return BivariateNormalParams(mu0=-1.0, m0=1.0, theta0=0.3, s=0.1, rho=-0.8)


@pytest.fixture
def rd_prior_04():
    return BivariateNormalParams(mu0=-1.0, m0=1.0, theta0=0.4, s=0.1, rho=-0.8)


@pytest.fixture
def logor_prior_04():
    return BivariateNormalParams(mu0=-1.0, m0=0.5, theta0=0.4, s=0.5, rho=-0.8)


@pytest.fixture
def logor_prior_wide():
    return BivariateNormalParams(mu0=-1.0, m0=0.5, theta0=0.0, s=1.0, rho=-0.8)


@pytest.fixture
def fast_quad():
    """Light rule for hot loops; agrees with the default to ~1e-6 here."""
    return QuadratureConfig(nodes_per_axis=100, panels_per_axis=3)
