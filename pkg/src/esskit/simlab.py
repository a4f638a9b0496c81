"""Seeded Monte Carlo oracles and simulation experiments.

Three workloads: a sampling estimate of the expected information-unit
variance (the independent cross-check of the quadrature engine), the
simulation-based small-sample ESS for the log-odds ratio, and the
predictive-consistency harness that repeatedly simulates a current trial,
refits, updates, and recomputes the posterior ESS.

All randomness flows from counter-based Philox streams: the consistency
harness spawns one child stream per replicate so serial and thread-parallel
runs aggregate bitwise-identical results in replicate order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import NamedTuple, Optional

import numpy as np

from .engine import ess_binomial, ess_normal
from .errors import (
    EsskitError,
    EstimationError,
    UnreliablePriorError,
    UnsupportedMeasureError,
    ValidationError,
)
from .inference import NormalSummary, fit_counts, posterior_bvn, posterior_ess, posterior_normal
from .measures import (
    EffectMeasure,
    MeasureKind,
    RandomizationRatio,
    _iu_variance_arrays,
    _probs_arrays,
)
from .numerics import BivariateNormalParams, QuadratureConfig, UnivariateNormal

__all__ = [
    "SimConfig",
    "ConsistencyReport",
    "McVarianceEstimate",
    "mc_expected_iu_variance",
    "small_sample_ess_logor",
    "predictive_consistency",
]

THREADS_ENV = "ESSKIT_THREADS"


@dataclass(frozen=True)
class SimConfig:
    """Seeded simulation settings; the correction pads zero/full cells."""

    seed: int
    replications: int = 100
    continuity_correction: float = 0.5

    def __post_init__(self) -> None:
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if not (isinstance(self.replications, int) and self.replications >= 1):
            raise ValidationError("replications must be a positive integer")
        if not (math.isfinite(self.continuity_correction)
                and self.continuity_correction >= 0.0):
            raise ValidationError("continuity_correction must be nonnegative")


@dataclass(frozen=True)
class ConsistencyReport:
    """Aggregate of a predictive-consistency run.

    ``consistency_gap`` is the average posterior total ESS minus the prior
    total ESS minus the current trial size; zero means the update added
    exactly the information the new subjects carried.
    """

    prior_ess_total: float
    avg_posterior_ess_total: float
    mc_std_error: float
    consistency_gap: float
    per_replicate: tuple[float, ...]
    current_trial_size: int

    def __post_init__(self) -> None:
        if len(self.per_replicate) < 1:
            raise ValidationError("report requires at least one replicate")
        if self.mc_std_error < 0.0:
            raise ValidationError("mc_std_error must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "prior_ess_total": self.prior_ess_total,
            "avg_posterior_ess_total": self.avg_posterior_ess_total,
            "mc_std_error": self.mc_std_error,
            "consistency_gap": self.consistency_gap,
            "per_replicate": list(self.per_replicate),
            "current_trial_size": self.current_trial_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConsistencyReport":
        return cls(
            prior_ess_total=d["prior_ess_total"],
            avg_posterior_ess_total=d["avg_posterior_ess_total"],
            mc_std_error=d["mc_std_error"],
            consistency_gap=d["consistency_gap"],
            per_replicate=tuple(d["per_replicate"]),
            current_trial_size=d["current_trial_size"],
        )


class McVarianceEstimate(NamedTuple):
    estimate: float
    std_error: float
    acceptance_rate: float


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _sample_joint(
    rng: np.random.Generator, prior: BivariateNormalParams, size: int
) -> tuple[np.ndarray, np.ndarray]:
    z = rng.standard_normal((2, size))
    l0 = prior.mu0 + prior.m0 * z[0]
    theta = (prior.theta0
             + prior.s * (prior.rho * z[0] + math.sqrt(1.0 - prior.rho ** 2) * z[1]))
    return l0, theta


def mc_expected_iu_variance(
    measure: EffectMeasure,
    prior: BivariateNormalParams,
    ratio: RandomizationRatio,
    cfg: SimConfig,
) -> McVarianceEstimate:
    """Monte Carlo estimate of the expected IU variance under the belief.

    Samples (l0, theta), maps to rate pairs, discards invalid pairs, and
    averages the IU variance over the kept draws: the estimate targets the
    expectation conditional on validity, i.e. the renormalized numerator.
    Deterministic given the seed.
    """
    if not measure.is_binomial:
        raise UnsupportedMeasureError("the Monte Carlo oracle requires a binomial measure")
    rng = _generator(cfg.seed)
    l0, theta = _sample_joint(rng, prior, cfg.replications)
    p0, p1, valid = _probs_arrays(measure, l0, theta)
    kept = int(valid.sum())
    acceptance = kept / cfg.replications
    if acceptance < 0.5:
        raise UnreliablePriorError(
            f"only {acceptance:.1%} of sampled rate pairs are valid; "
            "the belief is unreliable for this measure")
    sig2 = _iu_variance_arrays(measure, p0[valid], p1[valid], ratio)
    estimate = float(sig2.mean())
    std_error = float(sig2.std(ddof=1) / math.sqrt(kept)) if kept > 1 else float("inf")
    return McVarianceEstimate(estimate, std_error, acceptance)


def _corrected_rates(counts: np.ndarray, n: int, correction: float) -> np.ndarray:
    fixed = counts.astype(float)
    fixed[fixed == 0.0] = correction
    fixed[fixed == float(n)] = n - correction
    return fixed / n


def small_sample_ess_logor(
    prior: BivariateNormalParams,
    ratio: RandomizationRatio,
    iu_multiplier: int,
    cfg: SimConfig,
) -> float:
    """Simulation-based total-subject ESS for the log-odds ratio.

    Each replicate draws a rate pair from the belief, simulates one
    information unit of ``iu_multiplier * (a + b)`` subjects, and evaluates
    the sample-proportion variance of the unit's log-odds-ratio estimate
    (zero/full cells continuity-corrected). Averaging those per-replicate
    prior-to-unit information ratios and scaling by the unit size gives the
    subject-level ESS, which approaches the quadrature value as the unit
    grows.
    """
    if not (isinstance(iu_multiplier, int) and iu_multiplier >= 1):
        raise ValidationError("iu_multiplier must be a positive integer")
    n_trt = ratio.a * iu_multiplier
    n_ctrl = ratio.b * iu_multiplier
    rng = _generator(cfg.seed)
    l0, theta = _sample_joint(rng, prior, cfg.replications)
    measure = EffectMeasure.log_odds_ratio()
    p0, p1, _ = _probs_arrays(measure, l0, theta)
    y1 = rng.binomial(n_trt, p1)
    y0 = rng.binomial(n_ctrl, p0)

    if cfg.continuity_correction > 0.0:
        p1_hat = _corrected_rates(y1, n_trt, cfg.continuity_correction)
        p0_hat = _corrected_rates(y0, n_ctrl, cfg.continuity_correction)
    else:
        keep = (y1 > 0) & (y1 < n_trt) & (y0 > 0) & (y0 < n_ctrl)
        if not keep.any():
            raise EstimationError("every simulated information unit was degenerate")
        p1_hat = y1[keep] / n_trt
        p0_hat = y0[keep] / n_ctrl

    sig2_unit = (1.0 / (n_trt * p1_hat * (1.0 - p1_hat))
                 + 1.0 / (n_ctrl * p0_hat * (1.0 - p0_hat)))
    ess_per_unit = float(sig2_unit.mean()) / (prior.s * prior.s)
    return ess_per_unit * (n_trt + n_ctrl)


def _worker_count(replications: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap is not None:
        try:
            limit = int(cap)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer") from None
        limit = max(1, limit)
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, replications))


def predictive_consistency(
    measure: EffectMeasure,
    prior: BivariateNormalParams | UnivariateNormal,
    true_p0: Optional[float],
    true_p1: Optional[float],
    n1: int,
    n0: int,
    ratio: RandomizationRatio,
    cfg: SimConfig,
    quad: QuadratureConfig = QuadratureConfig(),
    renormalize: bool = False,
) -> ConsistencyReport:
    """Prior ESS vs. average posterior ESS after a simulated current trial.

    Binomial measures simulate counts at the true rates, refit, update, and
    recompute the ESS per replicate; boundary cells are continuity-corrected
    before fitting and a run errors if more than 1% of replicates still
    fail. The mean-difference path is closed-form (the posterior variance
    does not depend on the simulated outcomes), so every replicate is
    identical and the gap is exactly zero whenever n1:n0 matches the
    randomization ratio.
    """
    if not (isinstance(n1, int) and isinstance(n0, int) and n1 >= 1 and n0 >= 1):
        raise ValidationError("arm sizes must be positive integers")
    trial_size = n1 + n0

    if measure.kind == MeasureKind.MEAN_DIFFERENCE:
        if not isinstance(prior, UnivariateNormal):
            raise ValidationError("the mean-difference path requires a univariate belief")
        prior_ess = ess_normal(measure, ratio, prior.sd, prior.mean)
        sigma_sq = measure.s1_sq / n1 + measure.s0_sq / n0
        post = posterior_normal(prior.mean, prior.sd,
                                NormalSummary(theta_hat=prior.mean, sigma_sq=sigma_sq))
        post_total = ess_normal(measure, ratio, post.sd, post.mean).ess_total
        per = (post_total,) * cfg.replications
        avg = math.fsum(per) / len(per)
        return ConsistencyReport(
            prior_ess_total=prior_ess.ess_total,
            avg_posterior_ess_total=avg,
            mc_std_error=0.0,
            consistency_gap=avg - prior_ess.ess_total - trial_size,
            per_replicate=per,
            current_trial_size=trial_size,
        )

    if not isinstance(prior, BivariateNormalParams):
        raise ValidationError("binomial measures require a bivariate normal belief")
    for name, p in (("true_p0", true_p0), ("true_p1", true_p1)):
        if p is None or not (0.0 < p < 1.0):
            raise ValidationError(f"{name} must lie strictly inside (0, 1)")

    prior_ess = ess_binomial(measure, prior, ratio, quad, renormalize)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    correction = cfg.continuity_correction

    def one_replicate(stream: np.random.SeedSequence) -> float:
        rng = np.random.Generator(np.random.Philox(stream))
        y1 = int(rng.binomial(n1, true_p1))
        y0 = int(rng.binomial(n0, true_p0))
        fy1 = min(max(float(y1), correction), n1 - correction)
        fy0 = min(max(float(y0), correction), n0 - correction)
        fit = fit_counts(fy0, n0, fy1, n1, measure)
        post = posterior_bvn(prior, fit)
        return posterior_ess(measure, post, ratio, quad, renormalize).ess_total

    workers = _worker_count(cfg.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(partial(_guarded, one_replicate), streams))
    else:
        results = [_guarded(one_replicate, stream) for stream in streams]
    failures = sum(1 for r in results if r is None)
    if failures > 0.01 * cfg.replications:
        raise EstimationError(
            f"{failures}/{cfg.replications} replicates failed to fit even after "
            "continuity correction")
    per = tuple(r for r in results if r is not None)

    avg = math.fsum(per) / len(per)
    if len(per) > 1:
        var = math.fsum((x - avg) ** 2 for x in per) / (len(per) - 1)
        std_error = math.sqrt(var / len(per))
    else:
        std_error = 0.0
    return ConsistencyReport(
        prior_ess_total=prior_ess.ess_total,
        avg_posterior_ess_total=avg,
        mc_std_error=std_error,
        consistency_gap=avg - prior_ess.ess_total - trial_size,
        per_replicate=per,
        current_trial_size=trial_size,
    )


def _guarded(fn, stream) -> Optional[float]:
    try:
        return fn(stream)
    except EsskitError:
        return None
