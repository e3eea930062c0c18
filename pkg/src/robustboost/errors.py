"""Exception hierarchy shared across the package."""


class RobustBoostError(Exception):
    """Base class for all package errors."""


class DomainError(RobustBoostError, ValueError):
    """An argument is outside its documented domain."""


class NoBracket(RobustBoostError):
    """Scalar root finder could not bracket a sign change."""


class NoConvergence(RobustBoostError):
    """Iterative solver exhausted its budget.

    Carries the final iterate and residuals so callers can inspect how
    close the solve got.
    """

    def __init__(self, message, point=None, residuals=None):
        super().__init__(message)
        self.point = point
        self.residuals = residuals


class BoundaryHit(RobustBoostError):
    """A 2-D solve is pinned to a face of its bounding box.

    Not necessarily fatal: callers that expect a constrained solution
    (the time-horizon face of a boosting step) catch this and solve the
    reduced one-dimensional problem.
    """

    def __init__(self, message, face, point, residuals=None):
        super().__init__(message)
        self.face = face          # (coordinate index, "lo" | "hi")
        self.point = point
        self.residuals = residuals


class NoWeakLearner(RobustBoostError):
    """No candidate hypothesis has positive weighted correlation."""


class StepStall(RobustBoostError):
    """No admissible (dt > 0, dm > 0) step satisfies both step equations.

    Usually means the error goal was set too small for the data.
    """


class NonTermination(RobustBoostError):
    """Training did not reach the time horizon within its iteration budget."""

    def __init__(self, message, final_t, iterations, ensemble=None, trace=None):
        super().__init__(message)
        self.final_t = final_t
        self.iterations = iterations
        self.ensemble = ensemble
        self.trace = trace


class AllInfeasible(RobustBoostError):
    """Every candidate error goal failed to terminate within budget."""


class MissingSnapshot(RobustBoostError, KeyError):
    """Requested iteration was not snapshotted during training."""


class ParseError(RobustBoostError, ValueError):
    """Malformed dataset file; carries the offending location."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
