"""Domain errors raised by the library.

Each error name is part of the public contract: the CLI prints the class
name verbatim so shell scripts can branch on it.
"""


class AoiError(Exception):
    """Base class for all domain errors in this package."""


class TailEmpty(AoiError):
    """Mean residual life requested at a point with zero tail probability."""


class DivergentAge(AoiError):
    """Simulation exhausted its event budget before reaching the requested
    number of deliveries, which signals a vanishing success probability."""


class TruncationNotReached(AoiError):
    """The arrival partial-sum walk failed to become negligible within the
    term cap, which signals that the expected cycle arrival count may
    diverge."""


class ZeroSuccessProbability(AoiError):
    """No arrival can ever complete service under the given laws."""
