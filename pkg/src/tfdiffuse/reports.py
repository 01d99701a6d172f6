"""Deterministic CSV/JSON writers for benchmark and mixing runs.

Floats are written with 9 significant digits, lines end in LF and column
order is fixed, so identical runs give byte-identical files.
"""

import csv
import json
from pathlib import Path

import numpy as np

REPORT_COLUMNS = (
    "band_hz",
    "array",
    "index_name",
    "value",
    "eigenvalues",
    "I_x",
    "I_y",
    "I_z",
    "doa_az",
    "doa_zen",
    "clamp_count",
)
SUMMARY_COLUMNS = ("band_hz", "array", "index_name", "n", "mean", "min", "max", "max_abs_err", "pearson_r")


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            return "0"
        return f"{v:.9g}"
    if isinstance(v, str) and v and " " in v:
        # space-separated float lists (eigenvalues)
        try:
            return " ".join(format_value(float(t)) for t in v.split())
        except ValueError:
            return v
    return "" if v is None else str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row.get(c)) for c in columns])


def write_json(path, obj):
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def result_columns(result):
    return tuple(result.grid_keys) + REPORT_COLUMNS + tuple(result.extra_keys)


def write_reports(result, out_dir):
    """Write ``results.csv``, ``summary.csv`` and ``config.echo.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "results.csv", result_columns(result), result.rows())
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, result.summary())
    write_json(out / "config.echo.json", result.config)
    return [out / "results.csv", out / "summary.csv", out / "config.echo.json"]
