"""Exception types shared across the package.

Every contract failure raises a named subclass of :class:`DivboundError`
so callers (and the CLI exit-code mapping) can tell input problems apart
from genuine inequality violations or solver faults.
"""


class DivboundError(Exception):
    """Base class for all package errors."""


class SpaceMismatch(DivboundError):
    """Operands live on different finite metric spaces."""


class DegenerateSpace(DivboundError):
    """The operation needs at least two points."""


class InvalidFloor(DivboundError):
    """random_measure floor outside [0, 1/n)."""


class InsufficientGrid(DivboundError):
    """A grid-based operation received too few (or no) grid points."""


class NotStrictlyConvex(DivboundError):
    """The rate's derivative is not invertible (flat segments)."""


class UnsupportedDual(DivboundError):
    """No dual functional is defined for this divergence kind."""


class Infinite(DivboundError):
    """A quantity required to be finite is infinite (support violation)."""


class PositivityViolation(DivboundError):
    """The positivity condition licensing the forward bound fails."""


class InsufficientBudget(DivboundError):
    """A search was invoked with a zero or negative budget."""


class BudgetExceeded(DivboundError):
    """Exact enumeration would exceed the configured size budget."""


class InternalError(DivboundError):
    """A solver reached a state that valid inputs cannot produce."""
