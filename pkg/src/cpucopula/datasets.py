"""CSV ingestion and the two bundled case-study datasets.

Dataset A holds the two risks of the 20-observation toy example, dataset B
the 20 x 19 natural-peril losses (millions of euro, year column dropped).
Both files are pinned by SHA-256.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from cpucopula.errors import ParseError, SpecError

DATASET_FILES = {
    "A": ("dataset_a.csv", "a1575784d06b758c5656a7a86c9af6ffbbbb34ce9a292bdc8c4f564bd0284938"),
    "B": ("dataset_b.csv", "afd9e8a2a20cc7ba084128674cd4c18347b11cc2803d39b0501e5a92941f7367"),
}


@dataclass(frozen=True)
class Table:
    columns: list
    data: np.ndarray


def parse_csv(text: str, source: str = "<string>") -> Table:
    """Parse a header-first numeric CSV.

    Raises
    ------
    ParseError
        Empty input, ragged rows or non-numeric cells, with 1-based row and
        column of the first offending cell (the header is row 1).
    """
    rows = list(csv.reader(io.StringIO(text)))
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(f"{source}: empty file")
    header = [name.strip() for name in rows[0]]
    if not all(header):
        raise ParseError(f"{source}: blank column name", row=1)
    if len(rows) < 2:
        raise ParseError(f"{source}: no data rows", row=2)
    width = len(header)
    data = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ParseError(f"{source}: expected {width} fields, found {len(row)}", row=r)
        for c, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"{source}: non-numeric cell {cell!r}", row=r, column=c + 1) from None
            if not math.isfinite(value):
                raise ParseError(f"{source}: non-finite cell {cell!r}", row=r, column=c + 1)
            data[r - 2, c] = value
    return Table(header, data)


def ingest_csv(path) -> Table:
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            text = handle.read()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    return parse_csv(text, str(path))


def load_dataset(name: str) -> Table:
    """Load bundled dataset ``'A'`` or ``'B'`` after checking its hash."""
    key = name.upper()
    if key not in DATASET_FILES:
        raise SpecError(f"unknown dataset {name!r}; choose A or B")
    filename, digest = DATASET_FILES[key]
    raw = resources.files("cpucopula.data").joinpath(filename).read_bytes()
    if hashlib.sha256(raw).hexdigest() != digest:
        raise ParseError(f"bundled dataset {key} does not match its pinned hash")
    return parse_csv(raw.decode("utf-8"), f"dataset {key}")


def format_float(x) -> str:
    """Shortest round-trip representation; stable across runs."""
    return repr(float(x))


def write_matrix_csv(handle, columns, rows, fmt=format_float):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
