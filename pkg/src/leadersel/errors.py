"""Structured exceptions.

Every error carries a stable ``code`` (the class name) and the offending
datum so callers and the CLI can report machine-readable failures.
"""


class LeaderSelError(ValueError):
    """Base class for all domain errors raised by leadersel."""

    def __init__(self, message, datum=None):
        super().__init__(message)
        self.datum = datum

    @property
    def code(self):
        return type(self).__name__

    def to_dict(self):
        datum = self.datum
        if isinstance(datum, (set, frozenset, tuple)):
            datum = sorted(datum) if isinstance(datum, (set, frozenset)) else list(datum)
        return {"error": self.code, "message": str(self), "datum": datum}


# graph
class GraphFormatError(LeaderSelError):
    pass


class InvalidVertex(LeaderSelError):
    pass


class SelfLoop(LeaderSelError):
    pass


class DuplicateEdge(LeaderSelError):
    pass


class NonpositiveWeight(LeaderSelError):
    pass


class DisconnectedGraph(LeaderSelError):
    pass


class GenerationFailed(LeaderSelError):
    pass


# system
class SizeMismatch(LeaderSelError):
    pass


class DemotedReselected(LeaderSelError):
    pass


class NotASubset(LeaderSelError):
    pass


class MultipleZeroEigenvalues(LeaderSelError):
    pass


class PoleEvaluation(LeaderSelError):
    pass


# metrics / relaxation
class ShapeMismatch(LeaderSelError):
    pass


class ZeroNorm(LeaderSelError):
    pass


class MaxIterExceeded(LeaderSelError):
    pass


# selection
class CombinatorialBlowup(LeaderSelError):
    pass


# simulate
class StepTooLarge(LeaderSelError):
    pass
