"""Effective sample size computation.

The ESS of a normal belief on the treatment effect is the prior-to-unit
information ratio: the variance of one information unit (IU) divided by the
belief's effect variance, in IUs, then scaled by the IU size into subject
counts. Normal endpoints admit the closed form; binomial endpoints require
the expectation of the IU variance over the induced joint rate density,
evaluated by composite Gauss-Legendre quadrature on the unit square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import IntegrationError, UnsupportedMeasureError, ValidationError
from .measures import (
    EffectMeasure,
    MeasureKind,
    RandomizationRatio,
    _iu_variance_arrays,
    _transform_arrays,
    joint_prob_density,
)
from .numerics import (
    BivariateNormalParams,
    QuadratureConfig,
    _composite_axis,
    _refinement_levels,
)

__all__ = ["EssResult", "ess_normal", "ess_binomial", "conjugate_ess", "density_grid"]

LOW_MASS_THRESHOLD = 0.95


@dataclass(frozen=True)
class EssResult:
    """ESS at every scaling level, with integration diagnostics.

    ``ess_iu`` is the ESS in information units of size ``iu_size``;
    ``ess_total`` the subject-level ESS, split per arm by the randomization
    ratio. ``expected_iu_variance`` is the numerator actually used (divided
    by the captured mass when ``renormalized``); ``captured_mass_z`` is the
    induced density's total mass on the unit square (1.0 for normal
    endpoints and, up to quadrature error, for the log-odds ratio).
    """

    ess_iu: float
    iu_size: int
    ess_total: float
    ess_trt: float
    ess_ctrl: float
    captured_mass_z: float
    expected_iu_variance: float
    renormalized: bool
    quadrature_spread: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not (self.ess_iu > 0.0 and self.ess_total > 0.0):
            raise ValidationError("ESS must be positive")
        if not 0.0 < self.captured_mass_z <= 1.0:
            raise ValidationError("captured mass must lie in (0, 1]")
        rel = 1e-10 * max(1.0, abs(self.ess_total))
        if abs(self.ess_total - self.ess_iu * self.iu_size) > rel:
            raise ValidationError("ess_total must equal ess_iu * iu_size")
        if abs(self.ess_trt + self.ess_ctrl - self.ess_total) > rel:
            raise ValidationError("per-arm ESS must sum to ess_total")

    def to_dict(self) -> dict:
        return {
            "ess_iu": self.ess_iu,
            "iu_size": self.iu_size,
            "ess_total": self.ess_total,
            "ess_trt": self.ess_trt,
            "ess_ctrl": self.ess_ctrl,
            "captured_mass_z": self.captured_mass_z,
            "expected_iu_variance": self.expected_iu_variance,
            "renormalized": self.renormalized,
            "quadrature_spread": self.quadrature_spread,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EssResult":
        return cls(
            ess_iu=d["ess_iu"],
            iu_size=d["iu_size"],
            ess_total=d["ess_total"],
            ess_trt=d["ess_trt"],
            ess_ctrl=d["ess_ctrl"],
            captured_mass_z=d["captured_mass_z"],
            expected_iu_variance=d["expected_iu_variance"],
            renormalized=d["renormalized"],
            quadrature_spread=d.get("quadrature_spread", 0.0),
            warnings=tuple(d.get("warnings", ())),
        )


def _build_result(
    ess_iu: float,
    ratio: RandomizationRatio,
    captured_mass_z: float,
    expected_iu_variance: float,
    renormalized: bool,
    quadrature_spread: float = 0.0,
    warnings: tuple[str, ...] = (),
) -> EssResult:
    total = ess_iu * ratio.iu_size
    return EssResult(
        ess_iu=ess_iu,
        iu_size=ratio.iu_size,
        ess_total=total,
        ess_trt=total * ratio.a / ratio.iu_size,
        ess_ctrl=total * ratio.b / ratio.iu_size,
        captured_mass_z=captured_mass_z,
        expected_iu_variance=expected_iu_variance,
        renormalized=renormalized,
        quadrature_spread=quadrature_spread,
        warnings=warnings,
    )


def ess_normal(
    measure: EffectMeasure,
    ratio: RandomizationRatio,
    prior_s: float,
    prior_mean: Optional[float] = None,
) -> EssResult:
    """Closed-form ESS for a normal effect belief with known arm variances.

    ``prior_mean`` is accepted for interface symmetry and ignored: the
    normal-endpoint ESS does not depend on where the belief is centered.
    """
    if measure.kind != MeasureKind.MEAN_DIFFERENCE:
        raise UnsupportedMeasureError("ess_normal requires the mean-difference measure")
    if not (isinstance(prior_s, (int, float)) and math.isfinite(prior_s) and prior_s > 0):
        raise ValidationError("prior effect sd must be positive and finite")
    sigma2_iu = measure.s1_sq / ratio.a + measure.s0_sq / ratio.b
    return _build_result(
        ess_iu=sigma2_iu / (prior_s * prior_s),
        ratio=ratio,
        captured_mass_z=1.0,
        expected_iu_variance=sigma2_iu,
        renormalized=False,
    )


@lru_cache(maxsize=16)
def _measure_grid(kind: MeasureKind, a: int, b: int, cfg: QuadratureConfig):
    """Per-level static factors for the unit-square ESS integrand.

    Everything that does not depend on the normal belief (quadrature
    weights times Jacobian, the transformed coordinates, the IU variance
    surface) is precomputed once per (measure, ratio, config) and shared
    read-only across calls and threads.
    """
    measure = EffectMeasure(kind)
    ratio = RandomizationRatio(a, b)
    levels = []
    for nodes, panels in _refinement_levels(cfg):
        pts, wts = _composite_axis(0.0, 1.0, nodes, panels, cfg.domain_margin)
        p0 = pts[:, None]
        p1 = pts[None, :]
        h1, h2, jac = _transform_arrays(measure, p0, p1)
        wj = (wts[:, None] * wts[None, :]) * jac
        sig2 = _iu_variance_arrays(measure, p0, p1, ratio)
        arrays = (
            np.ascontiguousarray(np.broadcast_to(h1, wj.shape)),
            np.ascontiguousarray(np.broadcast_to(h2, wj.shape)),
            np.ascontiguousarray(wj),
            np.ascontiguousarray(np.broadcast_to(sig2, wj.shape)),
        )
        for arr in arrays:
            arr.flags.writeable = False
        levels.append(arrays)
    return tuple(levels)


def _binomial_moments(
    measure: EffectMeasure,
    prior: BivariateNormalParams,
    ratio: RandomizationRatio,
    cfg: QuadratureConfig,
) -> tuple[float, float, float]:
    """(expected IU variance, captured mass, spread) via leveled quadrature."""
    levels = _measure_grid(measure.kind, ratio.a, ratio.b, cfg)
    norm = 1.0 / (2.0 * np.pi * prior.m0 * prior.s * math.sqrt(1.0 - prior.rho ** 2))
    nums, masses = [], []
    for h1, h2, wj, sig2 in levels:
        z1 = (h1 - prior.mu0) / prior.m0
        z2 = (h2 - prior.theta0) / prior.s
        q = (z1 * z1 - 2.0 * prior.rho * z1 * z2 + z2 * z2) / (1.0 - prior.rho ** 2)
        f = np.exp(-0.5 * q)
        f *= wj
        masses.append(float(f.sum()) * norm)
        nums.append(float((f * sig2).sum()) * norm)
    if not all(math.isfinite(v) for v in nums + masses):
        raise IntegrationError("ESS quadrature produced a non-finite value")
    spread = max(abs(y - x) for x, y in zip(nums, nums[1:]))
    return nums[-1], masses[-1], spread


def ess_binomial(
    measure: EffectMeasure,
    prior: BivariateNormalParams,
    ratio: RandomizationRatio,
    cfg: QuadratureConfig = QuadratureConfig(),
    renormalize: bool = False,
) -> EssResult:
    """ESS of a joint normal (l0, theta) belief for a binomial endpoint.

    Integrates the IU-variance surface against the induced rate density
    over the unit square. The captured mass is reported rather than
    silently corrected; pass ``renormalize=True`` to divide the numerator
    by it. A warning is attached when the captured mass drops below 0.95,
    the regime where boundary-adjacent mass makes the estimate
    untrustworthy.
    """
    if not measure.is_binomial:
        raise UnsupportedMeasureError("ess_binomial requires a binomial effect measure")
    numerator, mass, spread = _binomial_moments(measure, prior, ratio, cfg)
    if mass <= 0.0:
        raise IntegrationError("induced density has no mass on the unit square")
    warnings: tuple[str, ...] = ()
    if mass < LOW_MASS_THRESHOLD:
        warnings = (
            f"captured mass {mass:.4f} below {LOW_MASS_THRESHOLD}: the belief places "
            "substantial probability on invalid rate pairs and the ESS may be distorted",
        )
    if renormalize:
        numerator = numerator / mass
    return _build_result(
        ess_iu=numerator / (prior.s * prior.s),
        ratio=ratio,
        captured_mass_z=min(mass, 1.0),  # clip quadrature overshoot at the exact bound
        expected_iu_variance=numerator,
        renormalized=renormalize,
        quadrature_spread=spread,
        warnings=warnings,
    )


def conjugate_ess(model: str, **hyper: float) -> float:
    """Reference ESS of the classic conjugate priors.

    ``beta(a, b)`` contributes ``a + b`` pseudo-observations,
    ``normal_mean(n0)`` (prior variance ``s^2/n0``) contributes ``n0``,
    and ``gamma(shape, rate)`` contributes ``rate``.
    """
    def positive(name: str) -> float:
        v = hyper.get(name)
        if v is None or not math.isfinite(v) or v <= 0.0:
            raise ValidationError(f"{model} prior requires positive {name!r}")
        return float(v)

    known = {"beta": ("a", "b"), "normal_mean": ("n0",), "gamma": ("shape", "rate")}
    if model not in known:
        raise ValidationError(f"unknown conjugate model {model!r}")
    extra = set(hyper) - set(known[model])
    if extra:
        raise ValidationError(f"unexpected hyperparameters for {model}: {sorted(extra)}")
    if model == "beta":
        return positive("a") + positive("b")
    if model == "normal_mean":
        return positive("n0")
    positive("shape")
    return positive("rate")


def density_grid(
    measure: EffectMeasure,
    prior: BivariateNormalParams,
    resolution: int = 200,
) -> np.ndarray:
    """Induced rate density sampled at cell centers of the unit square.

    Returns a ``(resolution**2, 3)`` array with columns ``(p0, p1, density)``,
    p0-major. Cell centers keep every sample strictly interior.
    """
    if not measure.is_binomial:
        raise UnsupportedMeasureError("density_grid requires a binomial effect measure")
    if not (isinstance(resolution, int) and resolution >= 1):
        raise ValidationError("resolution must be a positive integer")
    centers = (np.arange(resolution) + 0.5) / resolution
    p0 = np.repeat(centers, resolution)
    p1 = np.tile(centers, resolution)
    dens = joint_prob_density(measure, prior, p0, p1)
    return np.column_stack([p0, p1, dens])
