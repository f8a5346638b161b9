"""Deterministic CSV reading/writing used by every table in the workbench.

Floats are serialized at a fixed 17 significant digits so that emitted
files round-trip bit-exactly and rerun outputs compare byte-identical.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from ..errors import TableParseError


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableParseError(f"{path}: empty file, header row required")
        return header, [row for row in reader]


def parse_float(text: str, path, row_index: int, column: str) -> float | None:
    """Parse one numeric cell; blank means missing."""
    text = text.strip()
    if text == "" or text.lower() in ("nan", "na", "none"):
        return None
    try:
        return float(text)
    except ValueError:
        raise TableParseError(
            f"{path}: row {row_index + 2}, column {column!r}: "
            f"cannot parse {text!r} as a number"
        )
