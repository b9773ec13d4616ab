"""CSV and JSON export of sweep results."""

import csv
import io
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from ehmec.errors import InputError
from ehmec.experiments.sweep import SweepParameter, SweepResult
from ehmec.io.errors import handle_input_errors
from ehmec.io.files import dump_json, write_atomic

logger = logging.getLogger(__name__)

CSV_FIELDS = ["swept_value", "scheme", "trial", "objective", "converged", "parameter"]


def _format_value(parameter: SweepParameter, value: float) -> str:
    return str(int(value)) if parameter.integer else repr(float(value))


def to_csv(result: SweepResult) -> bytes:
    """One row per (value, trial, scheme); floats use their shortest exact form."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    parameter = result.spec.parameter
    for value, scheme, trial, objective, converged in result.rows():
        writer.writerow(
            [
                _format_value(parameter, value),
                scheme.value,
                trial,
                repr(objective),
                str(converged).lower(),
                parameter.value,
            ]
        )
    return buffer.getvalue().encode("utf-8")


def export(result: SweepResult, out_dir: Union[str, Path], stem: str = "sweep") -> Tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json`` into ``out_dir`` atomically."""
    directory = Path(out_dir)
    csv_path = write_atomic(directory / f"{stem}.csv", to_csv(result))
    json_path = write_atomic(directory / f"{stem}.json", dump_json(result.to_dict()))
    logger.info("Wrote %s and %s", csv_path, json_path)
    return csv_path, json_path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Rows of a CSV written by :func:`export`.

    Raises:
        InputError: If the file is missing or has unexpected columns.
    """
    with handle_input_errors(str(path)):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_FIELDS:
                raise InputError(f"unexpected columns {reader.fieldnames}", path=str(path), line=1)
            return list(reader)


def means_from_rows(rows: List[Dict[str, str]], exclude_nonconverged: bool = False) -> Dict[Tuple[float, str], float]:
    """Mean objective per ``(value, scheme)`` recomputed from CSV rows."""
    groups: Dict[Tuple[float, str], List[float]] = defaultdict(list)
    for row in rows:
        if exclude_nonconverged and row["converged"] != "true":
            continue
        groups[(float(row["swept_value"]), row["scheme"])].append(float(row["objective"]))
    return {key: float(np.mean(values)) for key, values in groups.items()}
