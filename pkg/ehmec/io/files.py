"""Reading and writing instances, configurations and results."""

import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

import orjson

from ehmec.core.model import Instance
from ehmec.errors import InputError
from ehmec.io.errors import handle_input_errors

PathLike = Union[str, Path]

JSON_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


def dump_json(data: Any) -> bytes:
    """Deterministic JSON bytes with a trailing newline."""
    return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"


def write_atomic(path: PathLike, data: bytes) -> Path:
    """Write ``data`` to ``path`` via a temporary file in the same directory."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def write_json(path: PathLike, data: Any) -> Path:
    """Atomically write ``data`` as JSON."""
    return write_atomic(path, dump_json(data))


def load_json(path: PathLike) -> Dict[str, Any]:
    """Parse a JSON object from ``path``.

    Raises:
        InputError: If the file is missing, malformed or not an object.
    """
    with handle_input_errors(str(path)):
        data = orjson.loads(Path(path).read_bytes())
    if not isinstance(data, dict):
        raise InputError("expected a JSON object at the top level", path=str(path), line=1)
    return data


def load_instance(path: PathLike) -> Instance:
    """Load and validate an instance file."""
    data = load_json(path)
    with handle_input_errors(str(path)):
        return Instance.from_file_dict(data)


def save_instance(instance: Instance, path: PathLike) -> Path:
    """Write ``instance`` in the file layout read by :func:`load_instance`."""
    return write_json(path, instance.to_file_dict())
