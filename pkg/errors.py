"""
Error types shared by every layer of the kinetic UQ toolkit.
The CLI maps them onto exit codes (2 = configuration, 3 = numeric).
"""


class KineticUQError(Exception):
    """Base class for all toolkit failures"""

    exit_code = 1


class ConfigurationError(KineticUQError, ValueError):
    """Scenario, catalog or model description is invalid"""

    exit_code = 2

    def __init__(self, message: str, key: str = None):
        self.key = key
        if key:
            message = f"[{key}] {message}"
        super().__init__(message)


class ArgumentError(KineticUQError, ValueError):
    """An operation was called with arguments outside its contract"""

    exit_code = 2


class NumericError(KineticUQError, ArithmeticError):
    """Quadrature, linear solve or stability failure"""

    exit_code = 3


class DomainError(NumericError):
    """A state or parameter lies outside its admissible domain"""


class InvariantViolation(NumericError):
    """A conservation or closure property was broken"""


class ReportIOError(KineticUQError, OSError):
    """Report files could not be written"""

    exit_code = 1

    def __init__(self, message: str, path: str):
        self.path = path
        super().__init__(f"{message}: {path}")
