"""Translation of parsing and validation failures into InputError."""

from contextlib import contextmanager
from typing import Iterator

import orjson
from pydantic import ValidationError

from ehmec.errors import InputError


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


@contextmanager
def handle_input_errors(path: str) -> Iterator[None]:
    """Context manager that turns file, JSON and schema errors into InputError.

    Raises:
        InputError: On missing or unreadable files, malformed JSON (with the
            offending line) and schema violations (with the field path)
    """
    try:
        yield
    except InputError:
        raise
    except FileNotFoundError as e:
        raise InputError("file not found", path=path) from e
    except orjson.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e.msg}", path=path, line=e.lineno) from e
    except ValidationError as e:
        raise InputError(f"schema violation: {_describe(e)}", path=path) from e
    except (OSError, ValueError, TypeError, KeyError) as e:
        raise InputError(f"invalid input: {e}", path=path) from e
