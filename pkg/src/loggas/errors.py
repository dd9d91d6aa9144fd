"""Exception hierarchy for the loggas package."""


class LoggasError(Exception):
    """Base class for all loggas errors."""


class DomainError(LoggasError, ValueError):
    """Input violates a documented domain constraint (bad parameter, point
    outside a kernel's domain, incompatible family/regime combination)."""


class CollisionError(LoggasError):
    """A configuration has a zero gap; the requested evaluation would be
    singular.  At the integrator level this signals a step-size violation."""


class StepUnderflowError(LoggasError):
    """Adaptive step fell below dt_min; the trajectory is aborted.

    Carries diagnostic context in ``.details`` (time reached, min gap)."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class NoiseRecordMissingError(LoggasError):
    """A frozen-tail re-solve was requested on a path recorded without its
    driving increments."""


class ConsistencyError(LoggasError):
    """A frozen-tail re-solve diverged from the reference step schedule
    (e.g. a replayed step violates the ordering the reference maintained)."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ConvergenceError(LoggasError):
    """Successive quadrature refinements failed to settle below tolerance."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DivergenceError(LoggasError):
    """The requested integral diverges (or its truncation point exceeds the
    supported range); the offending bound is reported in ``.details``."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class InconclusiveError(LoggasError):
    """A Monte Carlo estimate is too noisy to support a verdict."""
