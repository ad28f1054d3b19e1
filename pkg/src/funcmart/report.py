"""Deterministic JSON / CSV writers.

Floats are written with 17 significant digits so binary doubles round-trip
exactly.  JSON has no literal for non-finite numbers; those are written as
the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import re
from pathlib import Path

import numpy as np


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return fmt_float(v)
    if isinstance(v, enum.Enum):
        v = v.value
    if isinstance(v, str):
        return _json_string(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _json_string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps(obj, indent: int = 2) -> str:
    """Serialise dicts, lists, tuples, arrays and scalars; key order is kept."""

    def emit(o, level: int) -> str:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{_json_string(str(k))}: {emit(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o.tolist() if isinstance(o, np.ndarray) else o)
            if not seq:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
                return "[" + ", ".join(_scalar(v) for v in seq) + "]"
            return "[\n" + ",\n".join(pad + emit(v, level + 1) for v in seq) + "\n" + end + "]"
        return _scalar(o)

    return emit(obj, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def write_matrix_csv(path, times, values) -> Path:
    """One row per path: ``path_index`` then one column per grid time."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path_index", *(fmt_float(t) for t in times)])
        for i, row in enumerate(np.asarray(values, float)):
            writer.writerow([i, *(fmt_float(v) for v in row)])
    return path


def _rows_to_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")[:80] or "series"


def _dicts(obj):
    """Every dict nested anywhere in ``obj``, depth first, in key order."""
    if isinstance(obj, dict):
        yield obj
        for v in obj.values():
            yield from _dicts(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            yield from _dicts(v)


ZSCORE_HEADER = ["candidate", "transform", "s", "t", "instrument", "mean", "z", "p"]


def emit_plot_data(report: dict, out_dir) -> list[Path]:
    """Write CSV series for external plotting.

    ``zscores.csv`` gets one row per (candidate, transform, s, t, instrument)
    of every martingale verdict in the report (header only if there is
    none).  Every ``{"curve": name, "x": [...], "value": [...]}`` entry becomes
    ``curve_<name>.csv`` with ``x,value`` rows.
    """
    out = Path(out_dir)
    rows = []
    curves = []
    for node in _dicts(report):
        if "pairs" in node and "transform" in node:
            for p in node["pairs"]:
                rows.append([node.get("candidate", ""), node["transform"], p["s"], p["t"],
                             p["instrument"], p["mean"], p["z"], p["p"]])
        if "curve" in node and "x" in node and "value" in node:
            curves.append(node)
    written = [_rows_to_csv(out / "zscores.csv", ZSCORE_HEADER, rows)]
    seen: dict[str, int] = {}
    for c in curves:
        name = _slug(str(c["curve"]))
        seen[name] = seen.get(name, 0) + 1
        if seen[name] > 1:
            name = f"{name}_{seen[name]}"
        written.append(_rows_to_csv(out / f"curve_{name}.csv", ["x", "value"], zip(c["x"], c["value"])))
    return written
