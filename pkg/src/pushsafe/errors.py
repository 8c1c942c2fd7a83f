"""Exception hierarchy shared by all pushsafe modules."""


class PushSafeError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(PushSafeError, ValueError):
    """A parameter or operation point violates its declared domain."""


class DegenerateGeometry(PushSafeError):
    """The joint angle is too close to zero; force and thrust diverge."""


class NegativeThrust(PushSafeError):
    """The inner rotor pair would need negative thrust (model breakdown)."""


class NotBracketed(PushSafeError):
    """A thrust threshold is not crossed before the singular tail."""


class NonMonotone(PushSafeError):
    """Outer-pair thrust failed the monotonicity precheck."""


class NumericalBlowup(PushSafeError):
    """Simulator state left the finite, bounded region."""


class ConfigError(PushSafeError, ValueError):
    """Malformed configuration, CSV or JSON input."""
