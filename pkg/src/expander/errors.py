"""Exception types shared across the package."""

from __future__ import annotations


class ExpanderError(Exception):
    """Base class for all package errors."""


class ParameterError(ExpanderError, ValueError):
    """An argument is outside the documented range."""


class ContractViolation(ExpanderError):
    """A caller-supplied state or an internal invariant is broken."""


class SweepFailure(ContractViolation):
    """No level cut satisfies the sparse-crossing bound."""


class TrimFailure(ExpanderError):
    """Trimming could not certify the input set.

    Raised when the set empties, when more volume is removed than the
    boundary allows, or when the flow mass hypothesis is exceeded. Each of
    these means the input was not a nearly expander.
    """

    def __init__(self, reason: str, removed: list[int] | None = None):
        super().__init__(reason)
        self.reason = reason
        self.removed = removed or []


class BudgetExceeded(ParameterError):
    """More deletions were requested than the pruning budget allows."""
