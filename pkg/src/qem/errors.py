"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class QEMError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QEMError, ValueError):
    """A point (or a finite-difference stencil around it) left the chart domain."""


class MetricError(QEMError, ValueError):
    """The metric failed to be symmetric positive definite."""


class ParameterError(QEMError, ValueError):
    """Invalid scalar parameters (m <= 1 where m > 1 is required, bad ordering of c, lambda, C, ...)."""


class HypothesisViolation(QEMError):
    """Input does not satisfy the hypothesis of the statement being checked."""


class ProfileError(QEMError, ValueError):
    """Malformed profile data; the message names the offending row or column."""
