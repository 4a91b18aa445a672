"""Exception types shared across the package."""


class WavelabError(Exception):
    """Base class for errors raised by the library."""


class GuardError(WavelabError, ValueError):
    """A frequency cutoff would reach the aliasing zone of the grid."""


class RegionError(WavelabError, ValueError):
    """A norm region does not fit inside the periodic box."""


class CostError(WavelabError, ValueError):
    """A brute-force computation exceeds its configured cost cap."""


class ConfigError(WavelabError, ValueError):
    """Invalid run configuration."""
