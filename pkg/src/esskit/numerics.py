"""Deterministic numerical foundation.

Gauss-Legendre rules (nodes computed by Newton iteration on the Legendre
recurrence), composite tensor-product quadrature over rectangles with a
refinement-based error proxy, and bivariate normal density evaluation.

Everything here is a pure function of its inputs; cached rule tables are
read-only, so concurrent use is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, IntegrationError, ValidationError

__all__ = [
    "QuadratureConfig",
    "BivariateNormalParams",
    "UnivariateNormal",
    "IntegrationResult",
    "gauss_legendre_rule",
    "integrate_rect",
    "bvn_density",
]

_NEWTON_TOL = 1e-14
_NEWTON_MAX_ITER = 100


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite tensor-product quadrature settings.

    ``nodes_per_axis`` Gauss-Legendre nodes on each of ``panels_per_axis``
    equal panels per axis; ``domain_margin`` clamps evaluation points into
    ``[lo + margin, hi - margin]`` so integrands with endpoint singularities
    (the log-odds/log-risk variance kernels) are never evaluated at the
    boundary, while panel weights keep their full measure.
    """

    nodes_per_axis: int = 200
    panels_per_axis: int = 4
    domain_margin: float = 1e-8

    # Gauss-Legendre nodes are interior, so at production rule sizes no node
    # lies within the margin anyway; the clamp guards degenerate configs.

    def __post_init__(self) -> None:
        _require(isinstance(self.nodes_per_axis, int) and self.nodes_per_axis >= 2,
                 "nodes_per_axis must be an integer >= 2")
        _require(isinstance(self.panels_per_axis, int) and self.panels_per_axis >= 1,
                 "panels_per_axis must be an integer >= 1")
        _require(_finite(self.domain_margin) and 0.0 < self.domain_margin < 0.5,
                 "domain_margin must lie strictly between 0 and 0.5")


@dataclass(frozen=True)
class UnivariateNormal:
    """Normal belief on a scalar treatment effect."""

    mean: float
    sd: float

    def __post_init__(self) -> None:
        _require(_finite(self.mean), "mean must be finite")
        _require(_finite(self.sd) and self.sd > 0.0, "sd must be positive")


@dataclass(frozen=True)
class BivariateNormalParams:
    """Joint normal belief on (control log-odds, treatment effect).

    ``mu0``/``m0`` are the mean and sd of the nuisance coordinate (the
    control-arm log-odds), ``theta0``/``s`` the mean and sd of the effect
    coordinate, and ``rho`` the correlation. Used both as a prior and as a
    closed-form posterior.
    """

    mu0: float
    m0: float
    theta0: float
    s: float
    rho: float

    def __post_init__(self) -> None:
        for name in ("mu0", "m0", "theta0", "s", "rho"):
            _require(_finite(getattr(self, name)), f"{name} must be finite")
        _require(self.m0 > 0.0, "m0 must be positive")
        _require(self.s > 0.0, "s must be positive")
        _require(abs(self.rho) < 1.0, "rho must lie strictly inside (-1, 1)")

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mu0, self.theta0])

    def covariance(self) -> np.ndarray:
        off = self.rho * self.m0 * self.s
        return np.array([[self.m0 ** 2, off], [off, self.s ** 2]])

    def marginal_effect(self) -> UnivariateNormal:
        return UnivariateNormal(self.theta0, self.s)

    @classmethod
    def from_mean_cov(cls, mean: Sequence[float], cov: np.ndarray) -> "BivariateNormalParams":
        cov = np.asarray(cov, dtype=float)
        _require(cov.shape == (2, 2), "covariance must be 2x2")
        _require(abs(cov[0, 1] - cov[1, 0]) <= 1e-12 * max(1.0, abs(cov[0, 1])),
                 "covariance must be symmetric")
        _require(cov[0, 0] > 0.0 and cov[1, 1] > 0.0 and np.linalg.det(cov) > 0.0,
                 "covariance must be positive definite")
        m0 = math.sqrt(cov[0, 0])
        s = math.sqrt(cov[1, 1])
        return cls(float(mean[0]), m0, float(mean[1]), s, float(cov[0, 1] / (m0 * s)))


@dataclass(frozen=True)
class IntegrationResult:
    """Quadrature estimate plus a refinement-spread error proxy."""

    value: float
    panel_spread: float

    def __post_init__(self) -> None:
        _require(self.panel_spread >= 0.0, "panel_spread must be nonnegative")


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate P_n and P_n' via the three-term recurrence. Valid for |x| < 1."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def _gauss_legendre_impl(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.array([0.0]), np.array([2.0])

    m = (n + 1) // 2
    k = np.arange(1, m + 1, dtype=float)
    # Chebyshev-like asymptotic initial guesses, largest root first.
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAX_ITER):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    else:
        raise ConvergenceError(f"Legendre root-finding did not converge for n={n}")

    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    if n % 2 == 1:
        x[-1] = 0.0  # central root, exact by symmetry
        nodes = np.concatenate([-x[:-1], [0.0], x[-2::-1]])
        weights = np.concatenate([w[:-1], [w[-1]], w[-2::-1]])
    else:
        nodes = np.concatenate([-x, x[::-1]])
        weights = np.concatenate([w, w[::-1]])
    return nodes, weights


@lru_cache(maxsize=64)
def _gauss_legendre_cached(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gauss_legendre_impl(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Nodes are strictly increasing and symmetric about 0, weights positive
    and summing to 2; the rule is exact for polynomials of degree
    ``2n - 1``.
    """
    _require(isinstance(n, int) and n >= 1, "rule order must be a positive integer")
    nodes, weights = _gauss_legendre_cached(n)
    return nodes.copy(), weights.copy()


def _composite_axis(
    lo: float, hi: float, nodes: int, panels: int, margin: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of the composite rule on [lo, hi], ascending.

    Points are clamped into [lo + margin, hi - margin]; weights retain the
    full panel measure, so a constant integrates exactly.
    """
    x, w = _gauss_legendre_cached(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (hi - lo) / panels
    pts = half * (x[None, :] + 1.0) + edges[:-1, None]
    wts = np.broadcast_to(half * w, pts.shape)
    pts = np.clip(pts.reshape(-1), lo + margin, hi - margin)
    return pts, np.ascontiguousarray(wts).reshape(-1)


def _refinement_levels(cfg: QuadratureConfig) -> list[tuple[int, int]]:
    """(nodes, panels) chain, coarse to fine, finest = the configured rule."""
    levels = []
    p = cfg.panels_per_axis
    while p >= 1:
        levels.append((cfg.nodes_per_axis, p))
        p //= 2
    if len(levels) == 1:
        levels.append((max(2, cfg.nodes_per_axis // 2), 1))
    return levels[::-1]


def _checked_range(rng: tuple[float, float], margin: float) -> tuple[float, float]:
    lo, hi = float(rng[0]), float(rng[1])
    _require(math.isfinite(lo) and math.isfinite(hi) and hi - lo > 2.0 * margin,
             "integration range must be finite and wider than twice the margin")
    return lo, hi


def _eval_grid(f: Callable, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Evaluate f on the tensor grid, accepting vectorized or scalar f."""
    U = u[:, None]
    V = v[None, :]
    try:
        out = np.asarray(f(U, V), dtype=float)
        if out.shape != (u.size, v.size):
            out = np.broadcast_to(out, (u.size, v.size))
    except (TypeError, ValueError):
        out = np.vectorize(f, otypes=[float])(U, V)
    return out


def integrate_rect(
    f: Callable,
    u_range: tuple[float, float],
    v_range: tuple[float, float],
    cfg: QuadratureConfig = QuadratureConfig(),
) -> IntegrationResult:
    """Composite tensor-product Gauss-Legendre integral of f over a rectangle.

    ``f(u, v)`` must be finite on the margin-clamped evaluation domain; it
    is evaluated on numpy grids (a scalar-only callable is accepted and
    vectorized). The estimate uses the configured rule; ``panel_spread`` is
    the largest deviation between successive refinement levels, a practical
    error proxy. Deterministic for a fixed configuration: summation is
    single-threaded pairwise reduction in a fixed grid order.
    """
    u_lo, u_hi = _checked_range(u_range, cfg.domain_margin)
    v_lo, v_hi = _checked_range(v_range, cfg.domain_margin)

    estimates = []
    for nodes, panels in _refinement_levels(cfg):
        u_pts, u_wts = _composite_axis(u_lo, u_hi, nodes, panels, cfg.domain_margin)
        v_pts, v_wts = _composite_axis(v_lo, v_hi, nodes, panels, cfg.domain_margin)
        values = _eval_grid(f, u_pts, v_pts)
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise IntegrationError(
                f"integrand is not finite at (u={u_pts[i]!r}, v={v_pts[j]!r})")
        estimates.append(float(((values * u_wts[:, None]) * v_wts[None, :]).sum()))

    spread = max(abs(b - a) for a, b in zip(estimates, estimates[1:]))
    return IntegrationResult(value=estimates[-1], panel_spread=spread)


def bvn_density(l0, theta, p: BivariateNormalParams):
    """Joint normal density at (l0, theta); accepts scalars or arrays."""
    z1 = (np.asarray(l0, dtype=float) - p.mu0) / p.m0
    z2 = (np.asarray(theta, dtype=float) - p.theta0) / p.s
    one_minus = 1.0 - p.rho * p.rho
    q = (z1 * z1 - 2.0 * p.rho * z1 * z2 + z2 * z2) / one_minus
    out = np.exp(-0.5 * q) / (2.0 * np.pi * p.m0 * p.s * math.sqrt(one_minus))
    if np.isscalar(l0) and np.isscalar(theta):
        return float(out)
    return out
