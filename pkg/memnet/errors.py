"""Exception types shared by the simulator and the experiment runner."""

from __future__ import annotations


class MemnetError(Exception):
    """Base class for simulator errors that the CLI maps to exit codes"""


class ConfigError(MemnetError, ValueError):
    """Invalid experiment configuration; always names the offending field"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SimulationError(MemnetError, RuntimeError):
    """A run could not be carried out"""


class NoCircuitError(SimulationError):
    """Source and sink are not connected by any conducting branch"""


class SolverError(SimulationError):
    """A Kirchhoff solve produced non-finite values or missed its tolerance"""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class OutputError(MemnetError, OSError):
    """Writing run artifacts failed"""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")
