"""Semantic exception hierarchy.

Public functions never raise bare ``ValueError``/``RuntimeError``: input
contract violations raise :class:`ValidationError` (a ``ValueError``
subtype, mapped to usage errors by the CLI and 400 by the service), and
everything else derives from :class:`EsskitError` (computation failures,
mapped to exit code 1 / HTTP 422).
"""

from __future__ import annotations


class EsskitError(Exception):
    """Base error for this package."""

    code = "COMPUTATION_FAILURE"


class ValidationError(EsskitError, ValueError):
    """Inputs violate a documented contract (domain, type, shape)."""

    code = "VALIDATION"


class IntegrationError(EsskitError):
    """Numerical integration failed (non-finite integrand, bad domain)."""

    code = "INTEGRATION_FAILURE"


class UnsupportedMeasureError(EsskitError):
    """Operation not defined for the given effect measure."""

    code = "UNSUPPORTED_MEASURE"


class SingularityError(EsskitError):
    """Variance formula evaluated at a boundary singularity."""

    code = "SINGULARITY"


class BoundaryCountsError(EsskitError):
    """Event counts on the boundary: no interior maximum-likelihood estimate."""

    code = "BOUNDARY_COUNTS"


class ConvergenceError(EsskitError):
    """Iterative solver failed to converge.

    ``last_iterate`` carries the final point for diagnosis when available.
    """

    code = "NONCONVERGENCE"

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class UnreliablePriorError(EsskitError):
    """Prior places too much mass on invalid probability pairs."""

    code = "UNRELIABLE_PRIOR"


class EstimationError(EsskitError):
    """Simulation-based estimate could not be formed."""

    code = "ESTIMATION_FAILURE"
