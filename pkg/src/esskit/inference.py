"""Two-arm likelihood fitting and closed-form posterior updates.

The two-arm binomial likelihood is reparameterized by the control log-odds
and the treatment effect on the chosen scale; a damped Newton-Raphson
solver maximizes it with analytic gradient and Hessian, yielding the point
estimate and the observed-information covariance used both for correlation
elicitation and for the normal posterior update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import EssResult, ess_binomial, ess_normal
from .errors import (
    BoundaryCountsError,
    ConvergenceError,
    EsskitError,
    ValidationError,
)
from .measures import EffectMeasure, MeasureKind, RandomizationRatio, expit, logit
from .numerics import BivariateNormalParams, QuadratureConfig, UnivariateNormal

__all__ = [
    "TwoArmBinomialData",
    "FitResult",
    "NormalSummary",
    "fit_two_arm",
    "fit_counts",
    "posterior_bvn",
    "posterior_normal",
    "posterior_ess",
]

GRADIENT_TOL = 1e-10
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class TwoArmBinomialData:
    """Observed event counts: n1/y1 treatment, n0/y0 control."""

    n1: int
    y1: int
    n0: int
    y0: int

    def __post_init__(self) -> None:
        for name in ("n1", "y1", "n0", "y0"):
            if not isinstance(getattr(self, name), int):
                raise ValidationError(f"{name} must be an integer")
        if self.n1 < 1 or self.n0 < 1:
            raise ValidationError("arm sizes must be positive")
        if not (0 <= self.y1 <= self.n1 and 0 <= self.y0 <= self.n0):
            raise ValidationError("event counts must lie within their arm sizes")


@dataclass(frozen=True)
class NormalSummary:
    """Effect estimate and its sampling variance for a normal endpoint."""

    theta_hat: float
    sigma_sq: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta_hat):
            raise ValidationError("theta_hat must be finite")
        if not (math.isfinite(self.sigma_sq) and self.sigma_sq > 0.0):
            raise ValidationError("sigma_sq must be positive")


@dataclass(frozen=True, eq=False)  # ndarray field: compare via to_dict()
class FitResult:
    """Maximum-likelihood estimate with observed-information covariance."""

    nu_hat: tuple[float, float]
    sigma_hat: np.ndarray
    rho_hat: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "nu_hat": list(self.nu_hat),
            "sigma_hat": [list(row) for row in self.sigma_hat.tolist()] if isinstance(
                self.sigma_hat, np.ndarray) else self.sigma_hat,
            "rho_hat": self.rho_hat,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(
            nu_hat=tuple(d["nu_hat"]),
            sigma_hat=np.asarray(d["sigma_hat"], dtype=float),
            rho_hat=d["rho_hat"],
            iterations=d["iterations"],
            converged=d["converged"],
        )


def _treatment_rate(measure: EffectMeasure, l0: float, theta: float):
    """p1 and its first/second partials in (l0, theta); None if out of range."""
    p0 = expit(l0)
    d0 = p0 * (1.0 - p0)
    e0 = d0 * (1.0 - 2.0 * p0)
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        p1 = p0 + theta
        parts = (d0, 1.0, e0, 0.0, 0.0)
    elif measure.kind == MeasureKind.LOG_ODDS_RATIO:
        p1 = expit(l0 + theta)
        d1 = p1 * (1.0 - p1)
        e1 = d1 * (1.0 - 2.0 * p1)
        parts = (d1, d1, e1, e1, e1)
    else:
        et = math.exp(theta)
        p1 = p0 * et
        parts = (d0 * et, p1, e0 * et, p1, d0 * et)
    if not (0.0 < p1 < 1.0):
        return p0, None, None
    return p0, p1, parts


def _loglik_fgh(measure, l0, theta, y0, n0, y1, n1):
    """Log-likelihood with analytic gradient and Hessian; None out of range."""
    p0, p1, parts = _treatment_rate(measure, l0, theta)
    if p1 is None:
        return None
    dp1_dl, dp1_dt, d2p1_dll, d2p1_dtt, d2p1_dlt = parts
    d0 = p0 * (1.0 - p0)
    e0 = d0 * (1.0 - 2.0 * p0)

    ll = (y0 * math.log(p0) + (n0 - y0) * math.log1p(-p0)
          + y1 * math.log(p1) + (n1 - y1) * math.log1p(-p1))

    g0 = y0 / p0 - (n0 - y0) / (1.0 - p0)
    g1 = y1 / p1 - (n1 - y1) / (1.0 - p1)
    c0 = -y0 / p0 ** 2 - (n0 - y0) / (1.0 - p0) ** 2
    c1 = -y1 / p1 ** 2 - (n1 - y1) / (1.0 - p1) ** 2

    grad = np.array([g0 * d0 + g1 * dp1_dl, g1 * dp1_dt])
    h_ll = c0 * d0 * d0 + g0 * e0 + c1 * dp1_dl * dp1_dl + g1 * d2p1_dll
    h_lt = c1 * dp1_dl * dp1_dt + g1 * d2p1_dlt
    h_tt = c1 * dp1_dt * dp1_dt + g1 * d2p1_dtt
    hess = np.array([[h_ll, h_lt], [h_lt, h_tt]])
    return ll, grad, hess


def _inv_2x2(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not math.isfinite(det) or abs(det) < 1e-300:
        raise EsskitError("2x2 matrix is numerically singular")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def _effect_estimate(measure: EffectMeasure, p0: float, p1: float) -> float:
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        return p1 - p0
    if measure.kind == MeasureKind.LOG_ODDS_RATIO:
        return logit(p1) - logit(p0)
    return math.log(p1) - math.log(p0)


def fit_counts(
    y0: float,
    n0: float,
    y1: float,
    n1: float,
    measure: EffectMeasure,
    start: Optional[tuple[float, float]] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FitResult:
    """Newton-Raphson fit on raw (possibly continuity-corrected) counts.

    Counts may be non-integer but must be strictly interior. The default
    start is the empirical plug-in, which already maximizes the likelihood,
    so iteration only polishes; arbitrary external starts are handled by
    step halving.
    """
    if not measure.is_binomial:
        raise ValidationError("fitting requires a binomial effect measure")
    if not (0.0 < y0 < n0 and 0.0 < y1 < n1):
        raise BoundaryCountsError(
            "counts on the boundary admit no interior maximum-likelihood estimate")
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")

    if start is None:
        x = np.array([logit(y0 / n0), _effect_estimate(measure, y0 / n0, y1 / n1)])
    else:
        x = np.array([float(start[0]), float(start[1])])

    state = _loglik_fgh(measure, x[0], x[1], y0, n0, y1, n1)
    if state is None:
        raise ValidationError(f"starting point {tuple(x)} is outside the parameter space")

    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        ll, grad, hess = state
        if float(np.linalg.norm(grad)) < GRADIENT_TOL:
            converged = True
            iterations -= 1
            break
        step = -_inv_2x2(hess) @ grad
        t = 1.0
        for _ in range(60):  # halve until admissible and not worse
            cand = x + t * step
            cand_state = _loglik_fgh(measure, cand[0], cand[1], y0, n0, y1, n1)
            if cand_state is not None and cand_state[0] >= ll - 1e-12:
                break
            t *= 0.5
        else:
            raise ConvergenceError(
                "Newton step could not find an admissible improvement",
                last_iterate=tuple(x))
        x = cand
        state = cand_state
    else:
        _, grad, _ = state
        if float(np.linalg.norm(grad)) < GRADIENT_TOL:
            converged = True
        else:
            raise ConvergenceError(
                f"no convergence after {max_iter} iterations "
                f"(gradient norm {float(np.linalg.norm(grad)):.3e})",
                last_iterate=tuple(x))

    _, grad, hess = state
    sigma_hat = _inv_2x2(-hess)
    if sigma_hat[0, 0] <= 0.0 or sigma_hat[1, 1] <= 0.0 or np.linalg.det(sigma_hat) <= 0.0:
        raise ConvergenceError("observed information is not positive definite at the fit",
                               last_iterate=tuple(x))
    rho_hat = float(sigma_hat[0, 1] / math.sqrt(sigma_hat[0, 0] * sigma_hat[1, 1]))
    return FitResult(
        nu_hat=(float(x[0]), float(x[1])),
        sigma_hat=sigma_hat,
        rho_hat=rho_hat,
        iterations=iterations,
        converged=converged,
    )


def fit_two_arm(data: TwoArmBinomialData, measure: EffectMeasure) -> FitResult:
    """Fit the reparameterized two-arm binomial likelihood to trial counts."""
    return fit_counts(data.y0, data.n0, data.y1, data.n1, measure)


def posterior_bvn(prior: BivariateNormalParams, fit: FitResult) -> BivariateNormalParams:
    """Conjugate-style normal update of the joint (l0, theta) belief.

    Precisions add: the posterior precision matrix is the sum of the prior
    precision and the observed-information precision, and the posterior
    mean is the precision-weighted combination of prior mean and estimate.
    """
    if not fit.converged:
        raise ValidationError("posterior update requires a converged fit")
    prior_prec = _inv_2x2(prior.covariance())
    data_prec = _inv_2x2(np.asarray(fit.sigma_hat, dtype=float))
    m = prior_prec + data_prec
    post_cov = _inv_2x2(m)
    post_mean = post_cov @ (data_prec @ np.asarray(fit.nu_hat) + prior_prec @ prior.mean)
    return BivariateNormalParams.from_mean_cov(post_mean, post_cov)


def posterior_normal(
    prior_mean: float,
    prior_s: float,
    summary: NormalSummary,
) -> UnivariateNormal:
    """Precision-weighted univariate normal update for a normal endpoint."""
    if not (math.isfinite(prior_mean) and math.isfinite(prior_s) and prior_s > 0.0):
        raise ValidationError("prior mean must be finite and prior sd positive")
    prec = 1.0 / (prior_s * prior_s) + 1.0 / summary.sigma_sq
    mean = (prior_mean / (prior_s * prior_s) + summary.theta_hat / summary.sigma_sq) / prec
    return UnivariateNormal(mean=mean, sd=math.sqrt(1.0 / prec))


def posterior_ess(
    measure: EffectMeasure,
    belief: BivariateNormalParams | UnivariateNormal,
    ratio: RandomizationRatio,
    cfg: QuadratureConfig = QuadratureConfig(),
    renormalize: bool = False,
) -> EssResult:
    """ESS of an updated belief: same engine, posterior parameters."""
    if isinstance(belief, BivariateNormalParams):
        return ess_binomial(measure, belief, ratio, cfg, renormalize)
    if isinstance(belief, UnivariateNormal):
        return ess_normal(measure, ratio, belief.sd, belief.mean)
    raise ValidationError("belief must be a bivariate or univariate normal")
