"""Exception hierarchy for scenario validation and solver failures."""


class MergeError(Exception):
    """Base class for every error raised by this package."""


class ScenarioError(MergeError, ValueError):
    """A scenario violates one of its structural invariants."""


class UnorderedHdvs(ScenarioError):
    pass


class SpeedMismatch(ScenarioError):
    pass


class NonPositiveParameter(ScenarioError):
    pass


class AlphaOutOfRange(ScenarioError):
    pass


class ParameterOutOfRange(ScenarioError):
    pass


class IndexOutOfRange(MergeError, IndexError):
    pass


class TimeBeforeObservation(MergeError, ValueError):
    pass


class DegenerateHorizon(MergeError, ValueError):
    pass


class OutOfDomain(MergeError, ValueError):
    pass


class EmptyWindow(MergeError):
    """No admissible (merging time, merging velocity) pair exists for an index."""

    def __init__(self, k, reason):
        super().__init__(f"index {k}: {reason}")
        self.k = k
        self.reason = reason


class UnsafePoint(MergeError, ValueError):
    pass


class Infeasible(MergeError):
    pass


class NoFeasiblePlan(MergeError):
    pass


class AssumptionViolated(MergeError, ValueError):
    pass


class RetriesExhausted(MergeError, RuntimeError):
    pass
