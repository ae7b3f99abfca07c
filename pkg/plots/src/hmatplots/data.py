"""Reading and validating benchmark CSVs.

This package talks to the benchmark harness only through its published CSV
schema; nothing here imports the library that produced the file.  The
schema is one header row followed by one row per build:

    geometry,kernel,N,epsilon,method,nnz,compression,achieved_rel_error,
    error_mode,norm_mu,norm_jsd,norm_cols,rank_min,rank_med,rank_max,
    t_tree_ms,t_norm_ms,t_assemble_ms,t_error_ms,seed

``error_mode`` is ``exact`` or ``sampled`` for a completed build and
``error:<reason>`` for a failed one; failed rows may leave numeric fields
blank.  Validation is strict about anything else -- a malformed file is
reported with the offending line number rather than silently skipped.
"""

from __future__ import annotations

import csv
import sys

__all__ = [
    "CSV_COLUMNS",
    "MalformedCsvError",
    "load_rows",
    "completed_rows",
    "improvement_points",
    "collapse_by_size",
]

CSV_COLUMNS = [
    "geometry",
    "kernel",
    "N",
    "epsilon",
    "method",
    "nnz",
    "compression",
    "achieved_rel_error",
    "error_mode",
    "norm_mu",
    "norm_jsd",
    "norm_cols",
    "rank_min",
    "rank_med",
    "rank_max",
    "t_tree_ms",
    "t_norm_ms",
    "t_assemble_ms",
    "t_error_ms",
    "seed",
]

_INT_COLUMNS = ("N", "nnz", "norm_cols", "rank_min", "rank_max", "seed")
_FLOAT_COLUMNS = (
    "epsilon",
    "compression",
    "achieved_rel_error",
    "norm_mu",
    "norm_jsd",
    "rank_med",
    "t_tree_ms",
    "t_norm_ms",
    "t_assemble_ms",
    "t_error_ms",
)


class MalformedCsvError(ValueError):
    """A benchmark CSV that does not follow the schema; carries the 1-based
    line number of the first offending line."""

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line


def load_rows(csv_path) -> list[dict]:
    """Read a benchmark CSV into typed row dicts.

    Integer and float columns are converted; blank numeric fields become
    ``None`` (the harness leaves them blank on failed builds).  Raises
    :class:`MalformedCsvError` for a wrong header, a row with the wrong
    field count, or an unparseable number.
    """
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsvError(1, "empty file; expected the benchmark header") from None
        if header != CSV_COLUMNS:
            raise MalformedCsvError(1, f"unexpected header {header!r}")
        rows = []
        for record in reader:
            line = reader.line_num
            if not record:
                continue
            if len(record) != len(CSV_COLUMNS):
                raise MalformedCsvError(
                    line, f"expected {len(CSV_COLUMNS)} fields, found {len(record)}"
                )
            row = dict(zip(CSV_COLUMNS, record))
            for col in _INT_COLUMNS:
                row[col] = _convert(row[col], int, line, col)
            for col in _FLOAT_COLUMNS:
                row[col] = _convert(row[col], float, line, col)
            rows.append(row)
    return rows


def _convert(text: str, kind, line: int, col: str):
    if text == "":
        return None
    try:
        return kind(text)
    except ValueError:
        raise MalformedCsvError(
            line, f"column {col!r}: {text!r} is not {'an integer' if kind is int else 'a number'}"
        ) from None


def completed_rows(rows: list[dict]) -> list[dict]:
    """Rows describing completed builds, with failed ones dropped.

    A row is failed when ``error_mode`` starts with ``error:``; dropped
    rows are counted on stderr so a half-empty figure is explicable.
    """
    kept = [r for r in rows if not str(r["error_mode"]).startswith("error:")]
    dropped = len(rows) - len(kept)
    if dropped:
        print(f"plots: dropping {dropped} failed row(s)", file=sys.stderr)
    return kept


def improvement_points(rows: list[dict]) -> list[dict]:
    """Pair BREM and MREM rows and compute nnz(BREM) / nnz(MREM).

    Pairing is per (geometry, kernel, N, epsilon, seed), mirroring the
    harness's own report; points missing one side, or with a failed row on
    either side, are skipped with a warning.  Returns one dict per usable
    point with the pair's shared identity plus ``improvement_factor``.
    """
    by_point: dict[tuple, dict[str, dict]] = {}
    for row in rows:
        key = (row["geometry"], row["kernel"], row["N"], row["epsilon"], row["seed"])
        by_point.setdefault(key, {})[row["method"]] = row
    out = []
    for key in sorted(by_point, key=lambda k: tuple(str(p) for p in k)):
        pair = by_point[key]
        brem, mrem = pair.get("BREM"), pair.get("MREM")
        usable = (
            brem is not None
            and mrem is not None
            and not str(brem["error_mode"]).startswith("error:")
            and not str(mrem["error_mode"]).startswith("error:")
            and brem["nnz"]
            and mrem["nnz"]
        )
        if not usable:
            print(f"plots: skipping incomplete point {key}", file=sys.stderr)
            continue
        out.append(
            {
                "geometry": key[0],
                "kernel": key[1],
                "N": key[2],
                "epsilon": key[3],
                "seed": key[4],
                "improvement_factor": float(brem["nnz"]) / float(mrem["nnz"]),
            }
        )
    return out


def collapse_by_size(points: list[dict]) -> dict[tuple, float]:
    """Collapse improvement points to ``(geometry, kernel, N) -> factor``.

    When a CSV holds several tolerances or seeds for the same size, the
    entry at the smallest ``(epsilon, seed)`` wins, matching the slice the
    size-sweep panels draw.
    """
    best: dict[tuple, tuple] = {}
    out: dict[tuple, float] = {}
    for p in points:
        key = (p["geometry"], p["kernel"], p["N"])
        rank = (p["epsilon"], p["seed"])
        if key not in best or rank < best[key]:
            best[key] = rank
            out[key] = p["improvement_factor"]
    return out
