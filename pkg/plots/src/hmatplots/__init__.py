"""Figure panels for hmat benchmark CSVs.

The package is deliberately decoupled from the library that produces the
data: it consumes only the documented CSV schema, so archived result files
render the same way years later.  :func:`render` draws every panel a file
supports; :func:`if_series` extracts the BREM/MREM improvement-factor
series the panels plot.
"""

from .data import CSV_COLUMNS, MalformedCsvError, collapse_by_size, improvement_points, load_rows
from .render import render

__all__ = ["CSV_COLUMNS", "MalformedCsvError", "render", "if_series"]

__version__ = "0.1.0"


def if_series(csv_path) -> dict[tuple, float]:
    """Improvement factors keyed by (geometry, kernel, N).

    Pairs BREM and MREM rows exactly the way the benchmark's own report
    does (per geometry, kernel, N, epsilon, and seed; failed or one-sided
    points skipped with a warning).  When several tolerances or seeds
    cover the same size, the entry at the smallest (epsilon, seed) wins --
    the same slice the size-sweep panels draw.
    """
    return collapse_by_size(improvement_points(load_rows(csv_path)))
