"""CSV and plot-data emission.

Floats are written with ``repr`` so a parse of the file restores the exact
values, and rows keep their generation order; together with deterministic
experiments this makes re-runs byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .experiments import ExperimentResult, ResultRow

CSV_HEADER = ("sweep_name", "sweep_value", "method", "mean_sinr_db", "stderr_db", "mean_sinr_max_db", "trials")


class OutputError(OSError):
    pass


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _parse_cell(s: str):
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    return s


def render_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if result.is_table:
        w.writerow(result.columns)
        for row in result.table:
            w.writerow([_cell(v) for v in row])
    else:
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow([_cell(getattr(r, c)) for c in CSV_HEADER])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(result: ExperimentResult, path) -> Path:
    return _write(path, render_csv(result))


def read_csv(path) -> list[ResultRow] | list[tuple]:
    """Parse a file written by `emit_csv`.

    Returns `ResultRow`s for the SINR schema, plain tuples for tables.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    body = [tuple(_parse_cell(c) for c in row) for row in reader]
    if header != CSV_HEADER:
        return body
    rows = []
    for name, value, method, mean, se, mean_max, n in body:
        rows.append(ResultRow(str(name), value, str(method), float(mean), float(se), float(mean_max), int(n)))
    return rows


def _axes(result: ExperimentResult) -> dict:
    if result.is_table:
        return {"x": result.columns[1] if result.name == "mse-bounds" else result.columns[0],
                "y": list(result.columns[2:]) if result.name == "mse-bounds" else [result.columns[1]]}
    return {"x": result.sweep_name, "y": "mean_sinr_db", "error": "stderr_db"}


def emit_plot_data(result: ExperimentResult, path) -> tuple[Path, Path]:
    """Plot-ready CSV plus a JSON sidecar naming axes and series.

    The CSV has one column per series (methods for SINR results), so any
    plotting tool can read it directly. Returns (csv path, sidecar path).
    """
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if result.is_table:
        series = list(result.columns)
        w.writerow(series)
        for row in result.table:
            w.writerow([_cell(v) for v in row])
    else:
        methods = list(dict.fromkeys(r.method for r in result.rows))
        xs = list(dict.fromkeys(r.sweep_value for r in result.rows))
        by = {(r.sweep_value, r.method): r for r in result.rows}
        series = methods
        w.writerow([result.sweep_name] + [f"{m}{suffix}" for m in methods for suffix in ("", "_stderr")])
        for x in xs:
            cells = [_cell(x)]
            for m in methods:
                r = by.get((x, m))
                cells += [_cell(r.mean_sinr_db), _cell(r.stderr_db)] if r else ["", ""]
            w.writerow(cells)
    csv_path = _write(path, buf.getvalue())
    sidecar = {
        "experiment": result.name,
        "axes": _axes(result),
        "series": series,
        **{k: v for k, v in result.meta.items() if k != "experiment"},
    }
    json_path = _write(path.with_suffix(".json"), json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
