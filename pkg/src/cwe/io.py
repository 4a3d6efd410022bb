"""Dataset ingestion (CSV/JSON) and CSV emission."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataParseError, DomainError
from .models import Dataset


def _parse_float(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataParseError(f"line {line}: {text!r} is not a number") from None
    if not np.isfinite(value):
        raise DataParseError(f"line {line}: non-finite value {text!r}")
    return value


def _parse_csv(text: str) -> list[list[float]]:
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(io.StringIO(text)))
            if r and any(c.strip() for c in r)]
    if not rows:
        raise DataParseError("empty dataset")
    first_line, first = rows[0]
    try:
        [float(c) for c in first]
    except ValueError:
        # header row
        rows = rows[1:]
    if not rows:
        raise DataParseError("dataset has a header but no rows")
    width = len(rows[0][1])
    out = []
    for line, row in rows:
        if len(row) != width:
            raise DataParseError(f"line {line}: expected {width} columns, got {len(row)}")
        out.append([_parse_float(c.strip(), line) for c in row])
    return out


def _parse_json(text: str) -> list:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataParseError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, list) or not doc:
        raise DataParseError("JSON dataset must be a non-empty array")
    out = []
    for i, item in enumerate(doc):
        vals = item if isinstance(item, list) else [item]
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            raise DataParseError(f"element {i}: expected a number or [x, y] pair")
        out.append([float(v) for v in vals])
    return out


def parse_dataset(path, kind: str = "auto") -> Dataset:
    """Read a dataset from CSV or JSON.

    ``kind`` is ``"values"`` (one column), ``"pairs"`` (two columns x, y) or
    ``"auto"``.  JSON is recognised by a ``.json`` suffix or a leading ``[``.

    Raises
    ------
    DataParseError
        For unreadable, empty or malformed input; messages carry line numbers.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataParseError(f"cannot read {path}: {exc.strerror}") from None
    if not text.strip():
        raise DataParseError("empty dataset")
    if str(path).endswith(".json") or text.lstrip().startswith("["):
        rows = _parse_json(text)
    else:
        rows = _parse_csv(text)
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() not in (1, 2):
        raise DataParseError("rows must all hold one value or all hold an (x, y) pair")
    arr = np.array(rows, dtype=float)
    if arr.shape[1] == 1:
        arr = arr[:, 0]
    if kind == "values" and arr.ndim != 1:
        raise DataParseError("expected a single column of observations")
    if kind == "pairs" and arr.ndim != 2:
        raise DataParseError("expected two columns x, y")
    try:
        return Dataset(arr)
    except DomainError as exc:
        raise DataParseError(str(exc)) from None


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
