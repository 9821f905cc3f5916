"""Exception hierarchy.

Every error carries a short machine-readable ``category`` and the exit code
the command-line frontend uses for it.
"""


class FdaclustError(Exception):
    category = "internal"
    exit_code = 1


class DomainError(FdaclustError, ValueError):
    """An argument lies outside the domain an operation is defined on."""

    category = "domain"
    exit_code = 6


class InsufficientDataError(DomainError):
    category = "insufficient-data"


class DegenerateError(DomainError):
    """Input geometry or spectrum is degenerate (constant curve, zero spectrum, ...)."""

    category = "degenerate"


class ConditioningError(DomainError):
    category = "conditioning"


class BasisMismatchError(DomainError):
    category = "basis-mismatch"


class ParseError(FdaclustError, ValueError):
    """Malformed input text; ``line`` is 1-based when known."""

    category = "parse"
    exit_code = 4

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StructuralError(ParseError):
    category = "structure"


class OrderingError(ParseError):
    category = "ordering"


class SchemaError(ParseError):
    category = "schema"


class ConfigError(FdaclustError, ValueError):
    category = "config"
    exit_code = 5


class MissingFileError(FdaclustError, FileNotFoundError):
    category = "missing-file"
    exit_code = 3
