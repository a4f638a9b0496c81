import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esskit import (
    BivariateNormalParams,
    BoundaryCountsError,
    ConvergenceError,
    EffectMeasure,
    NormalSummary,
    RandomizationRatio,
    TwoArmBinomialData,
    UnivariateNormal,
    ValidationError,
    ess_normal,
    fit_counts,
    fit_two_arm,
    posterior_bvn,
    posterior_ess,
    posterior_normal,
)
from esskit.inference import _loglik_fgh
from esskit.measures import expit, logit

MEASURES = [
    EffectMeasure.risk_difference(),
    EffectMeasure.log_odds_ratio(),
    EffectMeasure.log_risk_ratio(),
]


def plain_loglik(measure, l0, theta, y0, n0, y1, n1):
    """Direct restatement of the two-arm binomial log-likelihood."""
    p0 = expit(l0)
    if measure.kind.value == "rd":
        p1 = p0 + theta
    elif measure.kind.value == "log-or":
        p1 = expit(l0 + theta)
    else:
        p1 = p0 * math.exp(theta)
    return (y0 * math.log(p0) + (n0 - y0) * math.log(1 - p0)
            + y1 * math.log(p1) + (n1 - y1) * math.log(1 - p1))


class TestFitTwoArm:
    def test_elicitation_reference_fit(self, rd):
        data = TwoArmBinomialData(n1=200, y1=70, n0=100, y0=20)
        fit = fit_two_arm(data, rd)
        assert fit.converged
        assert fit.nu_hat[0] == pytest.approx(-1.386, abs=5e-4)
        assert fit.nu_hat[1] == pytest.approx(0.15, abs=1e-12)
        assert fit.sigma_hat[0, 0] == pytest.approx(0.0625, abs=1e-10)
        assert fit.sigma_hat[0, 1] == pytest.approx(-0.01, abs=1e-10)
        assert fit.sigma_hat[1, 1] == pytest.approx(0.0027375, abs=1e-10)
        assert fit.rho_hat == pytest.approx(-0.765, abs=1e-3)

    @pytest.mark.parametrize("measure", MEASURES, ids=lambda m: m.kind.value)
    def test_equal_rates_give_null_effect(self, measure):
        fit = fit_two_arm(TwoArmBinomialData(n1=80, y1=24, n0=40, y0=12), measure)
        assert fit.nu_hat[1] == pytest.approx(0.0, abs=1e-12)
        assert fit.nu_hat[0] == pytest.approx(logit(0.3), abs=1e-12)

    def test_log_odds_delta_method_covariance(self, logor):
        n0, y0, n1, y1 = 100, 20, 200, 70
        fit = fit_two_arm(TwoArmBinomialData(n1=n1, y1=y1, n0=n0, y0=y0), logor)
        p0_hat, p1_hat = y0 / n0, y1 / n1
        assert fit.nu_hat[1] == pytest.approx(logit(0.35) - logit(0.20), abs=1e-10)
        var_l0 = 1 / (n0 * p0_hat * (1 - p0_hat))
        var_th = 1 / (n1 * p1_hat * (1 - p1_hat)) + 1 / (n0 * p0_hat * (1 - p0_hat))
        assert fit.sigma_hat[0, 0] == pytest.approx(var_l0, rel=1e-10)
        assert fit.sigma_hat[1, 1] == pytest.approx(var_th, rel=1e-10)

    @pytest.mark.parametrize("measure", MEASURES, ids=lambda m: m.kind.value)
    @given(data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_mle_properties(self, measure, data):
        n0 = data.draw(st.integers(min_value=5, max_value=400))
        n1 = data.draw(st.integers(min_value=5, max_value=400))
        y0 = data.draw(st.integers(min_value=1, max_value=n0 - 1))
        y1 = data.draw(st.integers(min_value=1, max_value=n1 - 1))
        fit = fit_two_arm(TwoArmBinomialData(n1=n1, y1=y1, n0=n0, y0=y0), measure)
        assert fit.converged

        # gradient norm at the estimate, Hessian negative definite
        _, grad, hess = _loglik_fgh(measure, fit.nu_hat[0], fit.nu_hat[1], y0, n0, y1, n1)
        assert float(np.linalg.norm(grad)) < 1e-10
        assert hess[0, 0] < 0 and np.linalg.det(hess) > 0

        # invariance: the implied rates are the empirical rates
        p0 = expit(fit.nu_hat[0])
        assert p0 == pytest.approx(y0 / n0, abs=1e-10)
        if measure.kind.value == "rd":
            p1 = p0 + fit.nu_hat[1]
        elif measure.kind.value == "log-or":
            p1 = expit(fit.nu_hat[0] + fit.nu_hat[1])
        else:
            p1 = p0 * math.exp(fit.nu_hat[1])
        assert p1 == pytest.approx(y1 / n1, abs=1e-10)

        # covariance symmetric positive definite and consistent with rho_hat
        assert fit.sigma_hat[0, 1] == fit.sigma_hat[1, 0]
        assert np.all(np.linalg.eigvalsh(fit.sigma_hat) > 0)
        assert fit.rho_hat == pytest.approx(
            fit.sigma_hat[0, 1] / math.sqrt(fit.sigma_hat[0, 0] * fit.sigma_hat[1, 1]),
            rel=1e-12)

    @pytest.mark.parametrize("measure", MEASURES, ids=lambda m: m.kind.value)
    def test_covariance_matches_finite_difference_hessian(self, measure):
        n0, y0, n1, y1 = 100, 20, 200, 70
        fit = fit_two_arm(TwoArmBinomialData(n1=n1, y1=y1, n0=n0, y0=y0), measure)
        l0, th = fit.nu_hat

        def ll(x, y):
            return plain_loglik(measure, x, y, y0, n0, y1, n1)

        def fd_hessian(h):
            h11 = (ll(l0 + h, th) - 2 * ll(l0, th) + ll(l0 - h, th)) / h**2
            h22 = (ll(l0, th + h) - 2 * ll(l0, th) + ll(l0, th - h)) / h**2
            h12 = (ll(l0 + h, th + h) - ll(l0 + h, th - h)
                   - ll(l0 - h, th + h) + ll(l0 - h, th - h)) / (4 * h**2)
            return np.array([[h11, h12], [h12, h22]])

        # Richardson extrapolation removes the O(h^2) truncation term while
        # h stays large enough to keep cancellation noise below 1e-7.
        h = 2e-3
        fd_hess = (4.0 * fd_hessian(h / 2) - fd_hessian(h)) / 3.0
        np.testing.assert_allclose(fit.sigma_hat, np.linalg.inv(-fd_hess), rtol=1e-6)

    def test_boundary_counts_rejected(self, rd):
        with pytest.raises(BoundaryCountsError):
            fit_two_arm(TwoArmBinomialData(n1=200, y1=70, n0=100, y0=0), rd)
        with pytest.raises(BoundaryCountsError):
            fit_two_arm(TwoArmBinomialData(n1=200, y1=200, n0=100, y0=20), rd)

    def test_external_start_converges(self, logor):
        fit = fit_counts(20, 100, 70, 200, logor, start=(1.5, -2.0))
        assert fit.converged
        assert fit.nu_hat[0] == pytest.approx(logit(0.2), abs=1e-9)
        assert fit.iterations > 0

    def test_nonconvergence_reports_last_iterate(self, logor):
        with pytest.raises(ConvergenceError) as info:
            fit_counts(20, 100, 70, 200, logor, start=(25.0, -50.0), max_iter=1)
        assert info.value.last_iterate is not None

    def test_continuity_corrected_counts_accepted(self, rd):
        fit = fit_counts(0.5, 100, 70.0, 200, rd)
        assert fit.converged
        assert expit(fit.nu_hat[0]) == pytest.approx(0.005, abs=1e-10)

    def test_data_validation(self):
        with pytest.raises(ValidationError):
            TwoArmBinomialData(n1=0, y1=0, n0=10, y0=2)
        with pytest.raises(ValidationError):
            TwoArmBinomialData(n1=10, y1=11, n0=10, y0=2)


class TestPosteriorBvn:
    def test_flat_prior_limit(self, rd, rd_prior_04):
        fit = fit_two_arm(TwoArmBinomialData(n1=100, y1=65, n0=50, y0=20), rd)
        flat = BivariateNormalParams(mu0=0.0, m0=1e6, theta0=0.0, s=1e6, rho=0.0)
        post = posterior_bvn(flat, fit)
        assert post.mu0 == pytest.approx(fit.nu_hat[0], abs=1e-4)
        assert post.theta0 == pytest.approx(fit.nu_hat[1], abs=1e-4)
        np.testing.assert_allclose(post.covariance(), fit.sigma_hat, rtol=1e-4)

    def test_data_dominant_limit(self, rd, rd_prior_04):
        fit = fit_two_arm(TwoArmBinomialData(n1=100, y1=65, n0=50, y0=20), rd)
        tight = type(fit)(
            nu_hat=fit.nu_hat,
            sigma_hat=fit.sigma_hat * 1e-8,
            rho_hat=fit.rho_hat,
            iterations=fit.iterations,
            converged=True,
        )
        post = posterior_bvn(rd_prior_04, tight)
        assert post.mu0 == pytest.approx(fit.nu_hat[0], abs=1e-6)
        assert post.theta0 == pytest.approx(fit.nu_hat[1], abs=1e-6)

    def test_precision_additivity_and_dominance(self, rd, rd_prior_04):
        fit = fit_two_arm(TwoArmBinomialData(n1=100, y1=65, n0=50, y0=20), rd)
        post = posterior_bvn(rd_prior_04, fit)
        post_prec = np.linalg.inv(post.covariance())
        prior_prec = np.linalg.inv(rd_prior_04.covariance())
        data_prec = np.linalg.inv(fit.sigma_hat)
        np.testing.assert_allclose(post_prec, prior_prec + data_prec, rtol=1e-9)
        # posterior covariance dominated by both sources in the PD order
        assert np.all(np.linalg.eigvalsh(post_prec - prior_prec) > -1e-9)
        assert np.all(np.linalg.eigvalsh(post_prec - data_prec) > -1e-9)

    def test_requires_converged_fit(self, rd_prior_04, rd):
        fit = fit_two_arm(TwoArmBinomialData(n1=100, y1=65, n0=50, y0=20), rd)
        stale = type(fit)(nu_hat=fit.nu_hat, sigma_hat=fit.sigma_hat,
                          rho_hat=fit.rho_hat, iterations=5, converged=False)
        with pytest.raises(ValidationError):
            posterior_bvn(rd_prior_04, stale)


class TestPosteriorNormal:
    def test_reference_variance(self):
        post = posterior_normal(0.0, 0.5, NormalSummary(theta_hat=0.1, sigma_sq=0.015))
        assert post.sd**2 == pytest.approx(1 / (1 / 0.015 + 1 / 0.25), rel=1e-12)
        assert post.sd**2 == pytest.approx(0.0141509, abs=5e-8)

    def test_agreement_keeps_the_mean(self):
        post = posterior_normal(0.3, 0.5, NormalSummary(theta_hat=0.3, sigma_sq=0.2))
        assert post.mean == pytest.approx(0.3, rel=1e-14)

    def test_no_data_limit_returns_prior(self):
        post = posterior_normal(0.3, 0.5, NormalSummary(theta_hat=9.9, sigma_sq=1e12))
        assert post.mean == pytest.approx(0.3, abs=1e-9)
        assert post.sd == pytest.approx(0.5, rel=1e-9)

    def test_univariate_matches_bivariate_embedding(self, rd):
        # With a diagonal prior and a diagonal estimate covariance the
        # effect coordinate of the joint update equals the scalar update.
        from esskit.inference import FitResult

        prior = BivariateNormalParams(mu0=-1.0, m0=0.8, theta0=0.25, s=0.2, rho=0.0)
        fit = FitResult(nu_hat=(-1.2, 0.18),
                        sigma_hat=np.diag([0.04, 0.006]),
                        rho_hat=0.0, iterations=0, converged=True)
        joint = posterior_bvn(prior, fit)
        scalar = posterior_normal(0.25, 0.2, NormalSummary(theta_hat=0.18, sigma_sq=0.006))
        assert joint.theta0 == pytest.approx(scalar.mean, rel=1e-13)
        assert joint.s == pytest.approx(scalar.sd, rel=1e-13)


class TestPosteriorEss:
    def test_reference_posterior_ess(self, mean_diff_unit, ratio_21):
        post = posterior_normal(0.0, 0.5, NormalSummary(theta_hat=0.0, sigma_sq=0.015))
        res = posterior_ess(mean_diff_unit, post, ratio_21)
        assert res.ess_iu == pytest.approx(106.0, rel=1e-12)
        assert res.ess_total == pytest.approx(318.0, rel=1e-12)

    def test_no_data_identity(self, mean_diff_unit, ratio_21):
        prior = UnivariateNormal(mean=0.0, sd=0.5)
        res = posterior_ess(mean_diff_unit, prior, ratio_21)
        assert res == ess_normal(mean_diff_unit, ratio_21, prior_s=0.5)

    @given(t=st.integers(min_value=1, max_value=500))
    @settings(max_examples=40, deadline=None)
    def test_exact_predictive_consistency_when_ratio_preserved(self, t):
        measure = EffectMeasure.mean_difference(1.0, 1.0)
        ratio = RandomizationRatio(2, 1)
        n1, n0 = ratio.a * t, ratio.b * t
        sigma_sq = measure.s1_sq / n1 + measure.s0_sq / n0
        post = posterior_normal(0.0, 0.5, NormalSummary(theta_hat=0.37, sigma_sq=sigma_sq))
        prior_total = ess_normal(measure, ratio, prior_s=0.5).ess_total
        post_total = posterior_ess(measure, post, ratio).ess_total
        assert post_total - prior_total - (n1 + n0) == pytest.approx(0.0, abs=1e-8)

    def test_binomial_dispatch(self, rd, rd_prior_04, ratio_21, fast_quad):
        from esskit import ess_binomial

        res = posterior_ess(rd, rd_prior_04, ratio_21, fast_quad)
        assert res == ess_binomial(rd, rd_prior_04, ratio_21, fast_quad)
