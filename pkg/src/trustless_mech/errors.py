"""Exception hierarchy shared across the simulator."""


class MechSimError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MechSimError):
    """A configuration, scenario, or mechanism input failed validation."""


class WireFormatError(MechSimError):
    """Bytes on the wire (or an identifier headed there) are malformed."""


class InvariantViolation(MechSimError):
    """An internal consistency check failed; indicates a bug, not bad input."""
