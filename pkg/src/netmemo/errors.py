"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class NetmemoError(Exception):
    exit_code = 1


class UsageError(NetmemoError, ValueError):
    """Bad parameters or arguments."""

    exit_code = 2


class CorruptStreamError(NetmemoError):
    """A coded stream is malformed, truncated or carries invalid tokens."""

    exit_code = 3


class InsufficientDataError(NetmemoError):
    """A corpus is too short for the requested memory and trial layout."""

    exit_code = 3


class SyncError(NetmemoError):
    """Encoder and decoder memories disagree (fingerprint mismatch)."""

    exit_code = 4
