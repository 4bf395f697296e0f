"""Exception hierarchy.

Every error raised deliberately by the library derives from
:class:`OrchSimError`, so callers can catch one type at the boundary.
"""


class OrchSimError(Exception):
    """Base class for all orchsim errors."""


class CapacityExceeded(OrchSimError):
    pass


class DuplicateTask(OrchSimError):
    pass


class UnknownTask(OrchSimError, KeyError):
    def __str__(self) -> str:  # KeyError repr-quotes its message
        return Exception.__str__(self)


class ZeroBandwidth(OrchSimError, ValueError):
    pass


class OutOfHorizon(OrchSimError, ValueError):
    """A time or interval falls outside the price forecast."""


class HorizonExceeded(OutOfHorizon):
    """A deadline-feasible plan cannot finish before the forecast ends."""


class InvalidAlpha(OrchSimError, ValueError):
    pass


class SliceSaturated(OrchSimError):
    pass


class Underflow(OrchSimError, ValueError):
    pass


class NoFeasibleNode(OrchSimError):
    pass


class Infeasible(OrchSimError):
    """The task cannot complete before its deadline."""


class InstanceTooLarge(OrchSimError, ValueError):
    pass


class InvalidScenario(OrchSimError, ValueError):
    """Base for scenario parsing/validation failures."""


class SchemaError(InvalidScenario):
    pass


class InvariantError(InvalidScenario):
    pass


class DuplicateId(InvalidScenario):
    pass
