"""Utility functions for the rate maximizer."""

from .fields import dict_deep_update, drop_none
from .logs import LOG_FORMAT, configure_logging

__all__ = [
    "dict_deep_update",
    "drop_none",
    "LOG_FORMAT",
    "configure_logging",
]
