"""Exception types shared across the package."""


class UavposError(Exception):
    """Base class for all package-specific errors."""


class DegenerateGeometry(UavposError):
    """Link geometry too degenerate to evaluate (e.g. distance below d_min)."""


class DemandUnserviceable(UavposError):
    """A traffic demand exceeds the top of the PHY rate ladder."""


class InvalidScenario(UavposError):
    """Scenario violates an environment precondition (e.g. bad start position)."""


class EpisodeFinished(UavposError):
    """step() called after the episode already ended."""


class ConfigError(UavposError):
    """Scenario file failed to parse or validate; message names the field."""


class EmptySeries(UavposError):
    """CDF/CCDF requested for an empty sample set."""


class FrameError(UavposError):
    """Truncated or malformed wire frame."""


class ProtocolError(UavposError):
    """Well-formed frame that violates the session protocol."""
