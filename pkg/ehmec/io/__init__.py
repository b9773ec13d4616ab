"""File input and output."""

from .errors import handle_input_errors
from .files import (
    dump_json,
    load_instance,
    load_json,
    save_instance,
    write_atomic,
    write_json,
)

__all__ = [
    "handle_input_errors",
    "dump_json",
    "load_instance",
    "load_json",
    "save_instance",
    "write_atomic",
    "write_json",
]
