"""Exception hierarchy shared by the solver, oracle, scenario and simulator."""


class EcoDriveError(Exception):
    """Base class for all package errors."""


class ValidationError(EcoDriveError, ValueError):
    """Input data violates a documented invariant."""


class ParseError(ValidationError):
    """A configuration, route or cycle file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class InfeasibleAtSample(EcoDriveError):
    """No admissible driving mode, or the velocity left its valid range, at sample ``k``."""

    def __init__(self, k, v=None, reason="no feasible driving mode"):
        self.k = k
        self.v = v
        msg = f"infeasible at sample {k}: {reason}"
        if v is not None:
            msg += f" (v={v:.4f} m/s)"
        super().__init__(msg)


class NonFiniteState(EcoDriveError):
    """The backward recursion produced NaN or inf."""

    def __init__(self, k):
        self.k = k
        super().__init__(f"non-finite state or co-state at sample {k}")


class BracketNotSignChanging(EcoDriveError):
    """Both co-state bounds give a boundary error of the same sign."""


class MaxIterationsExceeded(EcoDriveError):
    """Bisection stopped before meeting the velocity tolerance.

    ``result`` holds the best sweep seen so far (smallest boundary error).
    """

    def __init__(self, message, result=None, sample=None):
        self.result = result
        self.sample = sample
        super().__init__(message)


class NoFeasiblePath(EcoDriveError):
    """The dynamic-programming oracle found no path to the target velocity."""


class DegenerateCycle(EcoDriveError):
    """A drive cycle is too short to segment."""


class MissingSolution(EcoDriveError):
    """A velocity event was triggered but no solved advice is available."""


class VelocityFloorBreach(EcoDriveError):
    """Forward simulation dropped below the minimum valid velocity."""

    def __init__(self, s, v):
        self.s = s
        self.v = v
        super().__init__(f"velocity {v:.4f} m/s below floor at s={s:.2f} m")
