"""Effect-measure definitions.

Each binomial measure is a reparameterization of the two event rates
``(p0, p1)`` into ``(l0, theta)`` where ``l0`` is the control log-odds and
``theta`` the treatment effect on the measure's scale. This module houses
the forward/inverse transforms, the change-of-variable Jacobians, the
induced joint density on the unit square, and the per-information-unit
variance formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import SingularityError, UnsupportedMeasureError, ValidationError
from .numerics import BivariateNormalParams, bvn_density

__all__ = [
    "MeasureKind",
    "EffectMeasure",
    "RandomizationRatio",
    "ProbPair",
    "probs_from_params",
    "jacobian_abs",
    "joint_prob_density",
    "iu_variance",
]


class MeasureKind(str, Enum):
    MEAN_DIFFERENCE = "mean-diff"
    RISK_DIFFERENCE = "rd"
    LOG_ODDS_RATIO = "log-or"
    LOG_RISK_RATIO = "log-rr"


_BINOMIAL_KINDS = frozenset(
    {MeasureKind.RISK_DIFFERENCE, MeasureKind.LOG_ODDS_RATIO, MeasureKind.LOG_RISK_RATIO}
)


@dataclass(frozen=True)
class EffectMeasure:
    """Treatment-effect measure; mean differences carry known arm variances."""

    kind: MeasureKind
    s1_sq: Optional[float] = None
    s0_sq: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind == MeasureKind.MEAN_DIFFERENCE:
            for name, v in (("s1_sq", self.s1_sq), ("s0_sq", self.s0_sq)):
                if v is None or not math.isfinite(v) or v <= 0.0:
                    raise ValidationError(f"mean-difference requires positive {name}")
        elif self.s1_sq is not None or self.s0_sq is not None:
            raise ValidationError(f"{self.kind.value} does not take arm variances")

    @property
    def is_binomial(self) -> bool:
        return self.kind in _BINOMIAL_KINDS

    @classmethod
    def mean_difference(cls, s1_sq: float, s0_sq: float) -> "EffectMeasure":
        return cls(MeasureKind.MEAN_DIFFERENCE, s1_sq=s1_sq, s0_sq=s0_sq)

    @classmethod
    def risk_difference(cls) -> "EffectMeasure":
        return cls(MeasureKind.RISK_DIFFERENCE)

    @classmethod
    def log_odds_ratio(cls) -> "EffectMeasure":
        return cls(MeasureKind.LOG_ODDS_RATIO)

    @classmethod
    def log_risk_ratio(cls) -> "EffectMeasure":
        return cls(MeasureKind.LOG_RISK_RATIO)


@dataclass(frozen=True)
class RandomizationRatio:
    """a treatment : b control subjects per information unit."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if not (isinstance(self.a, int) and isinstance(self.b, int)):
            raise ValidationError("randomization ratio entries must be integers")
        if self.a < 1 or self.b < 1:
            raise ValidationError("randomization ratio entries must be >= 1")

    @property
    def iu_size(self) -> int:
        return self.a + self.b

    @classmethod
    def parse(cls, text: str) -> "RandomizationRatio":
        try:
            a_str, b_str = text.split(":")
            return cls(int(a_str), int(b_str))
        except (ValueError, AttributeError) as exc:
            raise ValidationError(f"ratio must look like 'a:b', got {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.a}:{self.b}"


@dataclass(frozen=True)
class ProbPair:
    """Event rates (control, treatment), both strictly inside (0, 1)."""

    p0: float
    p1: float

    def __post_init__(self) -> None:
        for name, v in (("p0", self.p0), ("p1", self.p1)):
            if not (math.isfinite(v) and 0.0 < v < 1.0):
                raise ValidationError(f"{name} must lie strictly inside (0, 1)")


def expit(x):
    """Numerically stable inverse logit, scalar or array."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def logit(p):
    p = np.asarray(p, dtype=float)
    out = np.log(p) - np.log1p(-p)
    if out.ndim == 0:
        return float(out)
    return out


def _require_binomial(measure: EffectMeasure) -> None:
    if not measure.is_binomial:
        raise UnsupportedMeasureError(
            f"operation requires a binomial effect measure, got {measure.kind.value}")


def probs_from_params(measure: EffectMeasure, l0: float, theta: float) -> Optional[ProbPair]:
    """Map (l0, theta) to event rates; None when the pair is out of range.

    The control rate is ``expit(l0)`` for every binomial measure; the
    treatment rate follows the measure's scale. Only the risk-difference
    and log-risk-ratio maps can land outside (0, 1).
    """
    _require_binomial(measure)
    p0 = expit(l0)
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        p1 = p0 + theta
    elif measure.kind == MeasureKind.LOG_ODDS_RATIO:
        p1 = expit(l0 + theta)
    else:
        p1 = p0 * math.exp(theta)
    if not (0.0 < p1 < 1.0) or not (0.0 < p0 < 1.0):
        return None
    return ProbPair(p0=p0, p1=p1)


def _probs_arrays(measure: EffectMeasure, l0: np.ndarray, theta: np.ndarray):
    """Vectorized inverse map: (p0, p1, valid mask)."""
    _require_binomial(measure)
    p0 = expit(l0)
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        p1 = p0 + theta
    elif measure.kind == MeasureKind.LOG_ODDS_RATIO:
        p1 = expit(l0 + theta)
    else:
        p1 = p0 * np.exp(theta)
    valid = (p0 > 0.0) & (p0 < 1.0) & (p1 > 0.0) & (p1 < 1.0)
    return p0, p1, valid


def _transform_arrays(measure: EffectMeasure, p0: np.ndarray, p1: np.ndarray):
    """Forward map on the open square: (l0, theta, |Jacobian|)."""
    q0 = p0 * (1.0 - p0)
    q1 = p1 * (1.0 - p1)
    h1 = logit(p0)
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        h2 = p1 - p0
        jac = 1.0 / q0
    elif measure.kind == MeasureKind.LOG_ODDS_RATIO:
        h2 = logit(p1) - h1
        jac = 1.0 / (q0 * q1)
    else:
        h2 = np.log(p1) - np.log(p0)
        jac = 1.0 / (p1 * q0)
    return h1, h2, jac


def jacobian_abs(measure: EffectMeasure, pair: ProbPair) -> float:
    """|det d(l0, theta)/d(p0, p1)| of the forward transform at the pair."""
    _require_binomial(measure)
    q0 = pair.p0 * (1.0 - pair.p0)
    q1 = pair.p1 * (1.0 - pair.p1)
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        value = 1.0 / q0
    elif measure.kind == MeasureKind.LOG_ODDS_RATIO:
        value = 1.0 / (q0 * q1)
    else:
        value = 1.0 / (pair.p1 * q0)
    if not math.isfinite(value):
        raise SingularityError("Jacobian is singular at the probability boundary")
    return value


def joint_prob_density(measure: EffectMeasure, prior: BivariateNormalParams, p0, p1):
    """Induced joint density of the event rates under the normal belief.

    Accepts scalars or arrays; points outside the open unit square get
    density 0. For the risk difference and log risk ratio the density
    integrates to less than 1 whenever the belief puts mass on invalid
    treatment rates (see the captured-mass diagnostic on ESS results).
    """
    _require_binomial(measure)
    p0a = np.asarray(p0, dtype=float)
    p1a = np.asarray(p1, dtype=float)
    inside = (p0a > 0.0) & (p0a < 1.0) & (p1a > 0.0) & (p1a < 1.0)
    p0s = np.where(inside, p0a, 0.5)
    p1s = np.where(inside, p1a, 0.5)
    h1, h2, jac = _transform_arrays(measure, p0s, p1s)
    dens = jac * bvn_density(h1, h2, prior)
    out = np.where(inside, dens, 0.0)
    if np.isscalar(p0) and np.isscalar(p1):
        return float(out)
    return out


def _iu_variance_arrays(
    measure: EffectMeasure, p0: np.ndarray, p1: np.ndarray, ratio: RandomizationRatio
) -> np.ndarray:
    """Vectorized information-unit variance on interior probability grids."""
    a, b = float(ratio.a), float(ratio.b)
    if measure.kind == MeasureKind.RISK_DIFFERENCE:
        return p1 * (1.0 - p1) / a + p0 * (1.0 - p0) / b
    if measure.kind == MeasureKind.LOG_ODDS_RATIO:
        return 1.0 / (a * p1 * (1.0 - p1)) + 1.0 / (b * p0 * (1.0 - p0))
    return (1.0 - p1) / (a * p1) + (1.0 - p0) / (b * p0)


def iu_variance(
    measure: EffectMeasure,
    pair: Optional[ProbPair],
    ratio: RandomizationRatio,
) -> float:
    """Sampling variance of one information unit's effect estimate.

    For the mean difference this is ``s1^2/a + s0^2/b`` and the pair is
    ignored; the binomial measures require the pair and use the true-rate
    plug-in forms. Scales as 1/k when the ratio is scaled by k.
    """
    if measure.kind == MeasureKind.MEAN_DIFFERENCE:
        return measure.s1_sq / ratio.a + measure.s0_sq / ratio.b
    _require_binomial(measure)
    if pair is None:
        raise ValidationError("binomial measures require a probability pair")
    with np.errstate(divide="ignore", over="ignore"):
        value = float(_iu_variance_arrays(
            measure, np.asarray(pair.p0), np.asarray(pair.p1), ratio))
    if not math.isfinite(value):
        raise SingularityError(
            f"information-unit variance diverges at (p0={pair.p0}, p1={pair.p1})")
    return value
