"""Deterministic JSON/CSV serialization and atomic file output."""

from __future__ import annotations

import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FLOAT_FORMAT = "%.17g"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return FLOAT_FORMAT % x


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and every float written as ``%.17g``."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",\n".join(
            f"{pad}{json.dumps(k, ensure_ascii=False)}: {to_json(v, indent, _level + 1)}"
            for k, v in items
        )
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        body = ",\n".join(pad + to_json(v, indent, _level + 1) for v in seq)
        return "[\n" + body + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(FLOAT_FORMAT % float(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_report(results, fmt: str = "json") -> str:
    """Serialize a report.

    ``json``: a mapping (empty input gives ``{}``). ``csv``: a mapping with
    ``header`` and ``rows``.
    """
    if fmt == "json":
        return to_json(results if results else {}) + "\n"
    if fmt == "csv":
        if not results:
            return ""
        return to_csv(results["header"], results["rows"])
    raise ValueError(f"unknown report format {fmt!r}")


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
