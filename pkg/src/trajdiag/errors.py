"""Exception types shared across the toolkit."""


class TrajdiagError(Exception):
    """Base class for all toolkit errors."""


class NetlistError(TrajdiagError):
    """Netlist syntax or circuit validation problem."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SimulationError(TrajdiagError):
    """The AC solve could not produce a finite response."""


class ConfigError(TrajdiagError):
    """Invalid configuration value (fault grid, GA parameters, run config)."""
