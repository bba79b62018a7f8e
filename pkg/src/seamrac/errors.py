"""Exception hierarchy shared by every subpackage."""


class SeaError(Exception):
    """Base class for all errors raised by seamrac."""


class InfeasibleGeometry(SeaError):
    """The linkage triangle collapses (SEA length radicand below epsilon)."""


class DegenerateAngle(SeaError):
    """A linkage sine left the admissible interval (eps, 1 + eps]."""


class NotHurwitz(SeaError):
    pass


class SolveSingular(SeaError):
    pass


class MatchingInfeasible(SeaError):
    """No ideal gains reproduce the reference model for this plant structure."""


class NonFiniteDerivative(SeaError):
    pass


class InsufficientTrace(SeaError):
    pass


class SimulationFault(SeaError):
    """A run aborted early. ``trace`` holds the records produced so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class GeometryFault(SimulationFault):
    pass


class NonFiniteState(SimulationFault):
    pass


class EmptyTrace(SeaError):
    pass


class BadCsv(SeaError):
    pass


class ParseError(SeaError):
    """Malformed config text. Carries the offending line and/or key."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationError(SeaError):
    """A config value violates a named constraint."""

    def __init__(self, constraint, message):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


class UnknownColumn(SeaError):
    pass
