"""Exceptions shared across the package."""

from __future__ import annotations


class QmapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QmapError):
    """An input violated a documented precondition."""


class SingularityError(QmapError):
    """A computation hit a (near-)singular quantity.

    Carries the offending value (determinant, denominator, eigenvalue)
    in ``value`` so callers can report it.
    """

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value


class ContractViolationError(QmapError):
    """A guaranteed outcome failed to materialize, signalling that the
    supplied inputs did not actually satisfy the stated precondition."""
