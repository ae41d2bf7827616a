"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class CascadeError(Exception):
    exit_code = 1


class ConfigError(CascadeError, ValueError):
    """Invalid parameters or options (bad fold index, theta out of range, ...)."""

    exit_code = 1


class DataError(CascadeError, ValueError):
    """Unreadable or malformed input data."""

    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDatasetError(DataError):
    pass


class MissingValueError(DataError):
    """A routing decision needed a feature whose value is missing."""

    def __init__(self, feature):
        super().__init__(f"missing value for feature {feature}")
        self.feature = feature


class DomainError(CascadeError, ValueError):
    exit_code = 3


class ResourceError(CascadeError):
    exit_code = 2
