"""CSV/JSON output and input helpers.

Every CSV carries comment lines (generating command, package version) and a
header row; numbers are written with 17 significant digits so reruns with
the same seed are byte-identical and regression-testable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "format_value",
    "write_csv",
    "read_csv",
    "write_json",
    "read_correlation_csv",
    "write_long_table",
]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header: list[str], rows, command: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if command:
        lines.append(f"# generated by: {command}")
    lines.append(f"# sunladder {__version__}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """(header, raw string rows), comments skipped."""
    header = None
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: no header row found")
    return header, rows


def read_columns(path, *names: str) -> list[np.ndarray]:
    header, rows = read_csv(path)
    idx = [header.index(n) for n in names]
    return [np.array([float(r[i]) for r in rows]) for i in idx]


def read_correlation_csv(path):
    """Load an (x, C, error) dump back into a CorrelationFunction."""
    from .analysis import CorrelationFunction

    header, rows = read_csv(path)
    meta = {}
    for raw in Path(path).read_text().splitlines():
        if raw.startswith("# length="):
            for part in raw[2:].split():
                k, _, v = part.partition("=")
                meta[k] = v
    xs, cs, es = read_columns(path, "x", "C", "error")
    length = int(meta.get("length", 2 * (len(xs) - 1)))
    boundary = meta.get("boundary", "periodic")
    return CorrelationFunction(
        x=xs.astype(int), values=cs, errors=es, length=length, boundary=boundary
    )


def write_correlation_csv(path, correlation, command: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if command:
        lines.append(f"# generated by: {command}")
    lines.append(f"# sunladder {__version__}")
    lines.append(f"# length={correlation.length} boundary={correlation.boundary}")
    lines.append("x,C,error")
    for x, c, e in zip(correlation.x, correlation.values, correlation.errors):
        lines.append(f"{int(x)},{format_value(c)},{format_value(e)}")
    path.write_text("\n".join(lines) + "\n")


def write_long_table(path, series: dict, command: str | None = None) -> None:
    """Plot-ready long-format table: (series, x, y, yerr)."""
    rows = []
    for name, (xs, ys, es) in series.items():
        for x, y, e in zip(xs, ys, es):
            rows.append((name, x, y, e))
    write_csv(path, ["series", "x", "y", "yerr"], rows, command=command)


class _JsonEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, cls=_JsonEncoder) + "\n")
