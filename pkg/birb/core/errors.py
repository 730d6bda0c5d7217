"""
Error Hierarchy
Every toolkit error carries the exit code the CLI reports for it
"""


class BirbError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1


class DimensionError(BirbError, ValueError):
    """Qubit counts or qubit indices do not match"""

    exit_code = 2


class ConfigurationError(BirbError, ValueError):
    """User configuration is invalid"""

    exit_code = 2


class DomainError(BirbError, ValueError):
    """Input lies outside the domain of an operation"""

    exit_code = 2


class CircuitParseError(BirbError, ValueError):
    """Circuit text is malformed"""

    exit_code = 2

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class CapabilityError(BirbError):
    """Request exceeds what an engine or sampler supports"""

    exit_code = 3

    def __init__(self, message: str, hint: str = ""):
        self.hint = hint
        super().__init__(f"{message} ({hint})" if hint else message)


class FitFailureError(BirbError):
    """Decay fit failed or landed on a parameter bound"""

    exit_code = 4
