"""Exception taxonomy shared across the framework.

The runner maps each category to a process exit code, so every error
raised by library code should derive from one of these.
"""


class FoliosegError(Exception):
    """Base class for all framework errors."""


class ConfigError(FoliosegError):
    """Invalid, unloadable, or unresolvable configuration."""

    def __init__(self, message: str, *, file: str | None = None, line: int | None = None):
        self.raw_message = message
        self.file = file
        self.line = line
        if file is not None and line is not None:
            message = f"{file}:{line}: {message}"
        elif file is not None:
            message = f"{file}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(FoliosegError):
    """Broken dataset layout, unreadable files, or undecodable pixels."""


class TrainingError(FoliosegError):
    """Failure during fitting: bad device, non-finite loss, callback crash."""


class EvaluationError(FoliosegError):
    """Failure while reassembling predictions or computing metrics."""


class CheckpointError(FoliosegError):
    """Unreadable, mismatched, or corrupt weight checkpoint."""
