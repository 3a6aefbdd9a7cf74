"""Deterministic CSV and text output."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FLOAT_FORMAT = ".12e"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v + 0.0, FLOAT_FORMAT)  # +0.0 folds -0.0
    return str(v)


def header(columns: Sequence[tuple[str, str]]) -> list[str]:
    """Column names with units, e.g. ``z [m]``; unitless columns keep the bare name."""
    return [f"{name} [{unit}]" if unit else name for name, unit in columns]


def write_csv(path, columns: Sequence[tuple[str, str]], rows: Iterable) -> Path:
    """Write an RFC-4180 CSV (CRLF line ends, minimal quoting) with a unit header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header(columns))
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    return path
