"""CSV interchange and run manifests.

Tables are comma separated with one header row of column names. Numbers
are written with 17 significant digits, enough to read every float64 back
unchanged. Output files are written to a temporary file and renamed into
place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .core import Dataset, DatasetError, ParameterError, validate_dataset


def format_number(v: float) -> str:
    return "%.17g" % v


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_table(path: str, header: list[str], rows) -> None:
    atomic_write(path, table_to_csv(header, rows))


def write_matrix(path: str, header: list[str], matrix: np.ndarray) -> None:
    write_table(path, header, (map(float, row) for row in np.asarray(matrix, dtype=np.float64)))


def dataset_header(dataset: Dataset) -> list[str]:
    return [f"x{i}" for i in range(dataset.x_dim)] + [f"y{i}" for i in range(dataset.y_dim)]


def write_dataset(path: str, dataset: Dataset) -> None:
    write_matrix(path, dataset_header(dataset), dataset.joint)


def dataset_to_csv(dataset: Dataset) -> str:
    return table_to_csv(dataset_header(dataset), (map(float, row) for row in dataset.joint))


def read_numeric_csv(source) -> tuple[list[str], np.ndarray]:
    """Parse a headed numeric CSV from a path or file object.

    Raises :class:`DatasetError` naming the data row (0-based, header
    excluded) and column of the first bad cell.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_numeric_csv(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty CSV: missing header row") from None
    header = [h.strip() for h in header]
    rows = []
    for r, raw in enumerate(reader):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(header):
            raise DatasetError(f"row {r} has {len(raw)} cells, header has {len(header)}", row=r)
        vals = []
        for c, cell in enumerate(raw):
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(f"row {r}, column {c} ({header[c]!r}): cannot parse {cell!r} as a number",
                                   row=r, column=c) from None
            if not np.isfinite(v):
                raise DatasetError(f"row {r}, column {c} ({header[c]!r}): non-finite value {cell!r}",
                                   row=r, column=c)
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise DatasetError("CSV has a header but no data rows")
    return header, np.array(rows, dtype=np.float64)


def parse_columns(spec: str, n_columns: int, header: list[str] | None = None) -> list[int]:
    """Column selection such as ``"0-4,7"``; names from the header are accepted too."""
    out = []
    for part in str(spec).split(","):
        part = part.strip()
        if not part:
            continue
        if header is not None and part in header:
            out.append(header.index(part))
        elif "-" in part.lstrip("-"):
            a, b = part.split("-", 1)
            try:
                lo, hi = int(a), int(b)
            except ValueError:
                raise ParameterError(f"bad column range {part!r}") from None
            if hi < lo:
                raise ParameterError(f"bad column range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise ParameterError(f"unknown column {part!r}") from None
    if not out:
        raise ParameterError(f"empty column selection {spec!r}")
    for c in out:
        if not 0 <= c < n_columns:
            raise ParameterError(f"column {c} out of range (table has {n_columns} columns)")
    return out


def read_dataset(path: str, x_cols: str, y_cols: str) -> Dataset:
    header, table = read_numeric_csv(path)
    xs = parse_columns(x_cols, table.shape[1], header)
    ys = parse_columns(y_cols, table.shape[1], header)
    return validate_dataset(table[:, xs], table[:, ys])


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def make_manifest(command: str, argv: list[str], params: dict, seed, inputs: list[str]) -> dict:
    return {
        "command": command,
        "argv": list(argv),
        "params": params,
        "seed": seed,
        "version": __version__,
        "input_digests": {p: file_digest(p) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def write_manifest(path: str, manifest: dict) -> None:
    atomic_write(path, dumps(manifest))
