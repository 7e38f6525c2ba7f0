"""Memory-assisted universal compression and network-wide memorization gain."""

__version__ = "0.1.0"

from netmemo.errors import (
    CorruptStreamError,
    InsufficientDataError,
    NetmemoError,
    SyncError,
    UsageError,
)

__all__ = [
    "__version__",
    "NetmemoError",
    "UsageError",
    "CorruptStreamError",
    "SyncError",
    "InsufficientDataError",
]
