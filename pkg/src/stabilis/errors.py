"""Exception hierarchy shared by all modules."""


class StabilisError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(StabilisError, ValueError):
    pass


class DisconnectedGraph(StabilisError, ValueError):
    pass


class SelfLoop(StabilisError, ValueError):
    pass


class DuplicateEdge(StabilisError, ValueError):
    pass


class NotLocallyProper(StabilisError, ValueError):
    pass


class TooLarge(StabilisError, ValueError):
    pass


class DomainViolation(StabilisError, ValueError):
    pass


class EmptySelection(StabilisError, ValueError):
    pass


class MissingColors(StabilisError, ValueError):
    pass


class IllegalRead(StabilisError, RuntimeError):
    """A guard or action dereferenced something the model forbids."""


class IllegalWrite(StabilisError, RuntimeError):
    """An action wrote a variable it did not declare."""


class WrongProtocol(StabilisError, ValueError):
    pass


class StateSpaceTooLarge(StabilisError, ValueError):
    pass


class SuffixTooShort(StabilisError, ValueError):
    pass
