"""Exception hierarchy shared by the solver modules and the CLI."""


class NozzleShockError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NozzleShockError, ValueError):
    """An argument lies outside the range where the quantity is defined."""


class NoSolutionError(NozzleShockError):
    """The flux equation has no root on the requested branch."""


class OutOfIntervalError(DomainError):
    """Requested exit speed is not inside the admissible interval."""

    def __init__(self, message, v_lo=None, v_hi=None):
        super().__init__(message)
        self.v_lo = v_lo
        self.v_hi = v_hi


class InvariantError(NozzleShockError):
    """A computed object violates one of its structural invariants."""


class DegenerateIntervalError(InvariantError):
    """The exit-speed map does not sweep an open interval.

    Carries the two endpoint limits so callers can report them.
    """

    def __init__(self, message, v_lo, v_hi):
        super().__init__(message)
        self.v_lo = v_lo
        self.v_hi = v_hi


class ConvergenceError(NozzleShockError):
    """An iteration hit its cap without meeting its tolerance."""

    def __init__(self, message, history=None, bracket=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.bracket = bracket


class LinearSolverError(NozzleShockError):
    """The sparse linear solve broke down or missed its tolerance."""
