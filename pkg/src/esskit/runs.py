"""Shared flat parameter schema and run functions.

The CLI flags, the CLI config file, and the HTTP request bodies all speak
the same flat key/value document; every command funnels through one
``run_*`` function here, so the two front ends are numerically identical
by construction. Unknown keys are rejected to keep documents auditable.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, Optional

from . import __version__
from .engine import density_grid, ess_binomial, ess_normal
from .errors import ValidationError
from .inference import (
    NormalSummary,
    TwoArmBinomialData,
    fit_two_arm,
    posterior_bvn,
    posterior_ess,
    posterior_normal,
)
from .measures import EffectMeasure, MeasureKind, RandomizationRatio
from .numerics import BivariateNormalParams, QuadratureConfig, UnivariateNormal
from .simlab import SimConfig, predictive_consistency

__all__ = [
    "run_ess",
    "run_fit",
    "run_posterior",
    "run_consistency",
    "run_density_grid",
    "ALLOWED_KEYS",
]

ALLOWED_KEYS = frozenset({
    "measure", "ratio",
    "theta0", "s", "mu0", "m0", "rho",
    "s1sq", "s0sq",
    "renormalize", "quad_nodes", "quad_panels", "quad_margin",
    "y0", "n0", "y1", "n1",
    "theta_hat", "sigma_sq",
    "true_p0", "true_p1", "reps", "seed", "continuity_correction",
    "resolution", "verbose", "output_format",
})

_MEASURE_NAMES = {kind.value: kind for kind in MeasureKind}


def _check_keys(params: Mapping[str, Any]) -> None:
    unknown = set(params) - ALLOWED_KEYS
    if unknown:
        raise ValidationError(f"unknown parameter(s): {sorted(unknown)}")


def _get_number(params: Mapping[str, Any], key: str, required: bool = True) -> Optional[float]:
    value = params.get(key)
    if value is None:
        if required:
            raise ValidationError(f"missing required parameter {key!r}")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"parameter {key!r} must be a number")
    if not math.isfinite(value):
        raise ValidationError(f"parameter {key!r} must be finite")
    return float(value)


def _get_int(params: Mapping[str, Any], key: str, required: bool = True) -> Optional[int]:
    value = params.get(key)
    if value is None:
        if required:
            raise ValidationError(f"missing required parameter {key!r}")
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"parameter {key!r} must be an integer")
    return value


def _get_bool(params: Mapping[str, Any], key: str, default: bool = False) -> bool:
    value = params.get(key, default)
    if not isinstance(value, bool):
        raise ValidationError(f"parameter {key!r} must be a boolean")
    return value


def build_measure(params: Mapping[str, Any]) -> EffectMeasure:
    name = params.get("measure")
    if name not in _MEASURE_NAMES:
        raise ValidationError(
            f"measure must be one of {sorted(_MEASURE_NAMES)}, got {name!r}")
    kind = _MEASURE_NAMES[name]
    if kind == MeasureKind.MEAN_DIFFERENCE:
        return EffectMeasure.mean_difference(
            _get_number(params, "s1sq"), _get_number(params, "s0sq"))
    for key in ("s1sq", "s0sq"):
        if params.get(key) is not None:
            raise ValidationError(f"{key} only applies to the mean-diff measure")
    return EffectMeasure(kind)


def build_ratio(params: Mapping[str, Any]) -> RandomizationRatio:
    raw = params.get("ratio")
    if raw is None:
        raise ValidationError("missing required parameter 'ratio'")
    if not isinstance(raw, str):
        raise ValidationError("ratio must be a string like '2:1'")
    return RandomizationRatio.parse(raw)


def build_quad(params: Mapping[str, Any]) -> QuadratureConfig:
    defaults = QuadratureConfig()
    nodes = _get_int(params, "quad_nodes", required=False)
    panels = _get_int(params, "quad_panels", required=False)
    margin = _get_number(params, "quad_margin", required=False)
    return QuadratureConfig(
        nodes_per_axis=defaults.nodes_per_axis if nodes is None else nodes,
        panels_per_axis=defaults.panels_per_axis if panels is None else panels,
        domain_margin=defaults.domain_margin if margin is None else margin,
    )


def build_bvn_prior(params: Mapping[str, Any]) -> BivariateNormalParams:
    return BivariateNormalParams(
        mu0=_get_number(params, "mu0"),
        m0=_get_number(params, "m0"),
        theta0=_get_number(params, "theta0"),
        s=_get_number(params, "s"),
        rho=_get_number(params, "rho"),
    )


def run_ess(params: Mapping[str, Any]) -> dict:
    _check_keys(params)
    measure = build_measure(params)
    ratio = build_ratio(params)
    if measure.kind == MeasureKind.MEAN_DIFFERENCE:
        result = ess_normal(measure, ratio,
                            prior_s=_get_number(params, "s"),
                            prior_mean=_get_number(params, "theta0", required=False))
    else:
        result = ess_binomial(
            measure, build_bvn_prior(params), ratio,
            cfg=build_quad(params),
            renormalize=_get_bool(params, "renormalize"),
        )
    return result.to_dict()


def run_fit(params: Mapping[str, Any]) -> dict:
    _check_keys(params)
    measure = build_measure(params)
    data = TwoArmBinomialData(
        n1=_get_int(params, "n1"), y1=_get_int(params, "y1"),
        n0=_get_int(params, "n0"), y0=_get_int(params, "y0"),
    )
    return fit_two_arm(data, measure).to_dict()


def run_posterior(params: Mapping[str, Any]) -> dict:
    _check_keys(params)
    measure = build_measure(params)
    ratio = build_ratio(params)
    if measure.kind == MeasureKind.MEAN_DIFFERENCE:
        # The normal ESS ignores means, so theta0 defaults to 0 and a missing
        # estimate defaults to agreement with the prior.
        prior_mean = _get_number(params, "theta0", required=False)
        prior_mean = 0.0 if prior_mean is None else prior_mean
        prior_s = _get_number(params, "s")
        theta_hat = _get_number(params, "theta_hat", required=False)
        summary = NormalSummary(
            theta_hat=prior_mean if theta_hat is None else theta_hat,
            sigma_sq=_get_number(params, "sigma_sq"),
        )
        post = posterior_normal(prior_mean, prior_s, summary)
        ess = posterior_ess(measure, post, ratio)
        return {
            "posterior": {"mean": post.mean, "sd": post.sd},
            "ess": ess.to_dict(),
        }
    prior = build_bvn_prior(params)
    data = TwoArmBinomialData(
        n1=_get_int(params, "n1"), y1=_get_int(params, "y1"),
        n0=_get_int(params, "n0"), y0=_get_int(params, "y0"),
    )
    fit = fit_two_arm(data, measure)
    post = posterior_bvn(prior, fit)
    ess = posterior_ess(measure, post, ratio,
                        cfg=build_quad(params),
                        renormalize=_get_bool(params, "renormalize"))
    return {
        "posterior": {
            "mu0": post.mu0, "m0": post.m0,
            "theta0": post.theta0, "s": post.s, "rho": post.rho,
        },
        "fit": fit.to_dict(),
        "ess": ess.to_dict(),
    }


def run_consistency(params: Mapping[str, Any]) -> dict:
    _check_keys(params)
    measure = build_measure(params)
    ratio = build_ratio(params)
    cfg = SimConfig(
        seed=_get_int(params, "seed"),
        replications=_get_int(params, "reps"),
        continuity_correction=(
            0.5 if params.get("continuity_correction") is None
            else _get_number(params, "continuity_correction")),
    )
    if measure.kind == MeasureKind.MEAN_DIFFERENCE:
        prior = UnivariateNormal(mean=_get_number(params, "theta0"),
                                 sd=_get_number(params, "s"))
        true_p0 = true_p1 = None
    else:
        prior = build_bvn_prior(params)
        true_p0 = _get_number(params, "true_p0")
        true_p1 = _get_number(params, "true_p1")
    report = predictive_consistency(
        measure, prior, true_p0, true_p1,
        n1=_get_int(params, "n1"), n0=_get_int(params, "n0"),
        ratio=ratio, cfg=cfg, quad=build_quad(params),
        renormalize=_get_bool(params, "renormalize"),
    )
    out = report.to_dict()
    if not _get_bool(params, "verbose"):
        out.pop("per_replicate")
    return out


def run_density_grid(params: Mapping[str, Any]) -> dict:
    _check_keys(params)
    measure = build_measure(params)
    prior = build_bvn_prior(params)
    resolution = _get_int(params, "resolution", required=False)
    grid = density_grid(measure, prior, resolution if resolution is not None else 200)
    return {
        "resolution": int(math.isqrt(grid.shape[0])),
        "rows": [[float(p0), float(p1), float(d)] for p0, p1, d in grid],
    }


def engine_version() -> str:
    return __version__
