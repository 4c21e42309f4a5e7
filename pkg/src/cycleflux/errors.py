"""Exception hierarchy for network construction and analysis."""


class CycleFluxError(Exception):
    """Base class for all package errors."""


class NetworkValidationError(CycleFluxError):
    """A network description failed validation."""


class DisconnectedGraph(NetworkValidationError):
    """The undirected support graph is not connected."""


class InvalidRate(NetworkValidationError):
    """A transition rate is negative or non-finite."""


class DanglingReference(NetworkValidationError):
    """A channel references an unknown state or reservoir id."""


class DuplicateChannel(NetworkValidationError):
    """Two channels share the same (state pair, reservoir)."""


class InvalidChannel(NetworkValidationError):
    """A channel is malformed (e.g. self-loop)."""


class InvalidReservoir(NetworkValidationError):
    """A reservoir has a non-positive temperature/coupling or a bad statistics tag."""


class SingularBeyondRankOne(CycleFluxError):
    """The rate matrix has more than one stationary distribution."""


class MissingAnnotation(CycleFluxError):
    """A channel lacks a transported-quantity annotation that was requested."""


class CycleBudgetExceeded(CycleFluxError):
    """Cycle enumeration exceeded the configured cap."""


class NumericalUnderflow(CycleFluxError):
    """Spanning-tree weights underflowed double precision; rescale the rates."""


class AbsorbingState(CycleFluxError):
    """A trajectory reached a state with zero total exit rate."""


class ZeroGapChannel(CycleFluxError):
    """A bosonic channel has zero energy gap (occupation diverges)."""


class NonPositiveFrequency(CycleFluxError, ValueError):
    """Bose occupation requested at a non-positive frequency."""
