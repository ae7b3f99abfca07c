"""Figure panels for benchmark CSVs.

Every (geometry, kernel) pair found in the file gets a row of size-sweep
panels: achieved error against N (with the requested tolerance as a dashed
line), compression against N, and the BREM/MREM improvement factor against
N.  When the file also sweeps the tolerance at some fixed N, that slice
gets a second row of panels against epsilon, plus compression against the
error actually achieved.

Marker convention: circles for BREM, x's for MREM (MREMmax, when present,
draws with '+').  All axes are log-log; the quantities span decades.
Rendering is a pure function of the CSV -- nothing is computed beyond the
ratios the columns already define.
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .data import completed_rows, improvement_points, load_rows

__all__ = ["render"]

_MARKERS = {"BREM": "o", "MREM": "x", "MREMmax": "+"}


def render(csv_path, out_dir) -> list[str]:
    """Render every panel the CSV supports into ``out_dir``.

    Returns the list of files written (PNG, one per panel, named
    ``{geometry}_{kernel}_{panel}.png`` with the colon dropped from kernel
    labels).  A CSV with no completed builds draws nothing and returns an
    empty list after a warning on stderr.
    """
    rows = completed_rows(load_rows(csv_path))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not rows:
        print(f"plots: {csv_path} has no completed builds; nothing to draw", file=sys.stderr)
        return []
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["geometry"], row["kernel"]), []).append(row)
    written: list[str] = []
    for (geometry, kernel), group in sorted(groups.items()):
        stem = f"{geometry}_{kernel.replace(':', '')}"
        title = f"{geometry}, {kernel}"
        eps0 = min(r["epsilon"] for r in group)
        size_slice = [r for r in group if r["epsilon"] == eps0]
        _size_panels(out, stem, title, size_slice, eps0, written)
        sweep_n = _tolerance_sweep_n(group)
        if sweep_n is not None:
            eps_slice = [r for r in group if r["N"] == sweep_n]
            _tolerance_panels(out, stem, title, eps_slice, sweep_n, written)
    return written


def _tolerance_sweep_n(group: list[dict]) -> int | None:
    """The largest N carrying at least two tolerances, if the CSV swept any."""
    eps_by_n: dict[int, set] = {}
    for row in group:
        eps_by_n.setdefault(row["N"], set()).add(row["epsilon"])
    swept = [n for n, eps in eps_by_n.items() if len(eps) >= 2]
    return max(swept) if swept else None


def _size_panels(
    out: Path, stem: str, title: str, rows: list[dict], eps: float, written: list[str]
) -> None:
    fig, ax = _new_axes(title, "N", "achieved relative error")
    _method_series(ax, rows, "N", "achieved_rel_error")
    ax.axhline(eps, linestyle="--", color="0.4", label=f"requested epsilon {eps:g}")
    ax.legend(fontsize="small")
    _save(fig, out / f"{stem}_error_vs_n.png", written)

    fig, ax = _new_axes(title, "N", "compression")
    _method_series(ax, rows, "N", "compression")
    ax.legend(fontsize="small")
    _save(fig, out / f"{stem}_compression_vs_n.png", written)

    fig, ax = _new_axes(title, "N", "improvement factor")
    points = improvement_points(rows)
    if points:
        points.sort(key=lambda p: (p["N"], p["seed"]))
        ax.plot(
            [p["N"] for p in points],
            [p["improvement_factor"] for p in points],
            marker="s",
            color="tab:green",
            label="nnz(BREM) / nnz(MREM)",
        )
        ax.legend(fontsize="small")
    else:
        _annotate_empty(ax, "no BREM/MREM pairs in this slice")
    _save(fig, out / f"{stem}_if_vs_n.png", written)


def _tolerance_panels(
    out: Path, stem: str, title: str, rows: list[dict], n: int, written: list[str]
) -> None:
    subtitle = f"{title}, N = {n}"
    eps_lo = min(r["epsilon"] for r in rows)
    eps_hi = max(r["epsilon"] for r in rows)

    fig, ax = _new_axes(subtitle, "requested epsilon", "achieved relative error")
    _method_series(ax, rows, "epsilon", "achieved_rel_error")
    ax.plot([eps_lo, eps_hi], [eps_lo, eps_hi], "--", color="0.4", label="achieved = requested")
    ax.legend(fontsize="small")
    _save(fig, out / f"{stem}_error_vs_eps.png", written)

    fig, ax = _new_axes(subtitle, "requested epsilon", "compression")
    _method_series(ax, rows, "epsilon", "compression")
    ax.legend(fontsize="small")
    _save(fig, out / f"{stem}_compression_vs_eps.png", written)

    fig, ax = _new_axes(subtitle, "requested epsilon", "improvement factor")
    points = improvement_points(rows)
    if points:
        points.sort(key=lambda p: (p["epsilon"], p["seed"]))
        ax.plot(
            [p["epsilon"] for p in points],
            [p["improvement_factor"] for p in points],
            marker="s",
            color="tab:green",
            label="nnz(BREM) / nnz(MREM)",
        )
        ax.legend(fontsize="small")
    else:
        _annotate_empty(ax, "no BREM/MREM pairs in this slice")
    _save(fig, out / f"{stem}_if_vs_eps.png", written)

    fig, ax = _new_axes(subtitle, "achieved relative error", "compression")
    _method_series(ax, rows, "achieved_rel_error", "compression")
    ax.legend(fontsize="small")
    _save(fig, out / f"{stem}_compression_vs_achieved.png", written)


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(4.8, 3.6), layout="constrained")
    ax.set_title(title, fontsize="medium")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _method_series(ax, rows: list[dict], x_col: str, y_col: str) -> None:
    for method in sorted({r["method"] for r in rows}):
        pts = sorted(
            (r[x_col], r[y_col])
            for r in rows
            if r["method"] == method and r[x_col] is not None and r[y_col] is not None
        )
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=_MARKERS.get(method, "."), label=method)


def _annotate_empty(ax, message: str) -> None:
    ax.text(0.5, 0.5, message, ha="center", va="center", transform=ax.transAxes)


def _save(fig, path: Path, written: list[str]) -> None:
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(str(path))
