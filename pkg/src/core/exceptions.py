class BellSimError(Exception):
    """Base class for all simulator errors."""


class InvalidFrame(BellSimError, ValueError):
    """Frame velocity is not strictly below the speed of light."""


class InvalidGeometry(BellSimError, ValueError):
    """Experiment geometry violates one of its invariants.

    The offending field name is kept in ``field`` so callers can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class KinematicsError(BellSimError):
    """Measurement events cannot be time-ordered as required."""


class NotSpacelike(KinematicsError):
    """The two measurement events are not spacelike separated."""


class TimingDegenerate(KinematicsError):
    """The events are simultaneous (within tolerance) in an apparatus frame."""


class UnknownModel(BellSimError, ValueError):
    """No causal model is registered under the given identifier."""


class EmptyCounts(BellSimError, ValueError):
    """A correlation was requested from a table with no trials."""


class MismatchedSettings(BellSimError, ValueError):
    """Count tables do not share the fixed-side setting."""


class ConfigError(BellSimError, ValueError):
    """Configuration file failed validation.

    ``key`` is the dotted path of the offending entry (e.g. ``geometry.alice_beta``).
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
