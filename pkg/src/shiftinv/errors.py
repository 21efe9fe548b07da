"""Semantic exception hierarchy.

Every operation that can refuse an input raises one of these instead of a
bare ValueError, so callers (and the CLI) can distinguish usage errors,
resource blowups, and per-candidate discard signals from hard failures.
"""


class ShiftInvError(Exception):
    """Base class for all package errors."""


class DomainError(ShiftInvError):
    """An argument lies outside the operation's mathematical domain."""


class ParameterError(ShiftInvError):
    """Parameters violate a documented precondition (counts, ranges)."""


class ResourceError(ShiftInvError):
    """A derived problem size exceeds the configured cap."""


class DivergenceError(ShiftInvError):
    """A tail integral fails to converge (decay at or below 1/z)."""


class DegeneracyError(ShiftInvError):
    """A sample covariance is numerically singular."""


class CoverageError(ShiftInvError):
    """An integration box misses more than the allowed density mass."""


class CandidateDiscard(ShiftInvError):
    """Per-candidate abort: rejection sampling became too inefficient.

    Never fatal at pipeline level; the offending candidate is dropped.
    """


class PipelineFailure(ShiftInvError):
    """No feasible candidate survived; carries per-frame diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class InvariantViolation(ShiftInvError):
    """An internal contract was broken (signals a caller contract breach)."""
