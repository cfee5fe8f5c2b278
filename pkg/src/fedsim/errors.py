"""Exception hierarchy shared across the simulator."""


class FedsimError(Exception):
    """Base class for all fedsim errors."""


class EmptyInput(FedsimError):
    """An operation received zero elements where at least one is required."""


class DimensionMismatch(FedsimError):
    """Parameter vectors (or aligned lists) disagree in length."""


class NonFiniteValue(FedsimError):
    """A NaN or infinity was about to enter a parameter vector."""


class NonFiniteWeight(FedsimError):
    """An aggregation weight is NaN or infinite."""


class FormatError(FedsimError):
    """A checkpoint file is malformed (bad magic, truncation, bad payload)."""


class MissingHistory(FedsimError):
    """A strategy needs at least two cost entries and a client has fewer."""


class InvalidCost(FedsimError):
    """A cost value is non-positive or non-finite."""


class InvalidArgument(FedsimError):
    """A scalar argument is outside its documented domain."""


class DivergenceError(FedsimError):
    """Local training produced a non-finite cost."""


class ConfigError(FedsimError):
    """A simulation configuration violates one of its constraints."""
