"""Matrix norms from an entry oracle: exact sweeps and a stochastic estimate.

The stochastic Frobenius estimator samples columns without replacement.
Column ``j`` contributes ``X_j = N * sum_i B[i, j]**2``, an unbiased
estimate of ``||B||_F^2``; the running mean ``mu`` of the samples is the
estimate and its spread is tracked by ``jsd``, the delete-1 jackknife
standard deviation of the mean,

    jsd = sqrt( sum((X_j - mu)^2) / (n * (n - 1)) ),

which shrinks like ``1/sqrt(n)``.  Sampling grows in doubling batches until
``jsd`` drops below a tolerance, by default ``mu / 50`` (the tolerance may
also be absolute).  Because these matrices can concentrate most of their
Frobenius mass in a few near-diagonal entries, convergence at a small
sample is not guaranteed; an exhausted budget returns an estimate flagged
unconverged and the caller decides.

Downstream consumers that must not loosen an error bound use
``safe_fro_norm``: the estimate minus two jackknife deviations, floored at
zero and square-rooted.

Exact counterparts (``exact_fro_norm``, ``induced_one_norm``) sweep all
columns in chunks; they are affordable whenever ``N^2`` entries are.

All functions accept either a 2-d :class:`numpy.ndarray` or an oracle
object with ``n``/``col`` (optionally ``block``) like
:class:`hmat.geometry.KernelMatrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NormEstimate",
    "UnconvergedEstimateError",
    "estimate_fro_stochastic",
    "estimate_fro_via_coarse",
    "exact_fro_norm",
    "induced_one_norm",
]


class UnconvergedEstimateError(ValueError):
    """Raised when an unconverged norm estimate is used where convergence is required."""


@dataclass(frozen=True)
class NormEstimate:
    """Outcome of stochastic Frobenius-norm estimation.

    Attributes
    ----------
    mu : float
        Estimate of ``||B||_F^2`` (mean of the column samples).
    jsd : float
        Delete-1 jackknife standard deviation of ``mu``.
    n_samples : int
        Columns consumed.
    converged : bool
        Whether the stopping rule was met within the sample budget.
    """

    mu: float
    jsd: float
    n_samples: int
    converged: bool

    @property
    def safe_fro_norm(self) -> float:
        """``sqrt(max(mu - 2 * jsd, 0))``: a norm that errs low, never high."""
        return math.sqrt(max(self.mu - 2.0 * self.jsd, 0.0))


def _column_access(matrix):
    """Normalise array / oracle input to ``(col, block_or_None, n_rows, n_cols)``."""
    if isinstance(matrix, np.ndarray):
        if matrix.ndim != 2:
            raise ValueError("expected a 2-d array")
        a = matrix.astype(np.float64, copy=False)

        def col(j: int) -> np.ndarray:
            return a[:, j]

        def block(cols: np.ndarray) -> np.ndarray:
            return a[:, cols]

        return col, block, a.shape[0], a.shape[1]
    n = matrix.n
    col = matrix.col
    block = None
    if hasattr(matrix, "block"):
        rows = np.arange(n)

        def block(cols: np.ndarray) -> np.ndarray:
            return matrix.block(rows, cols)

    return col, block, n, n


def estimate_fro_stochastic(
    matrix,
    *,
    rel_jsd_tol: float = 1.0 / 50.0,
    seed: int = 0,
    min_cols: int = 8,
    max_cols: int | None = None,
    relative: bool = True,
) -> NormEstimate:
    """Estimate ``||B||_F^2`` by sampling columns without replacement.

    Parameters
    ----------
    matrix : ndarray or column oracle
        The matrix to estimate.
    rel_jsd_tol : float
        Stopping tolerance for ``jsd``; relative to ``mu`` when
        ``relative`` is true (default ``1/50``), absolute otherwise.
    seed : int
        Seed for the sampling order (PCG64).
    min_cols : int
        First batch size (at least 2 columns are always taken).
    max_cols : int, optional
        Sample budget; defaults to all columns.  Exhausting the budget
        without meeting the stopping rule yields ``converged=False``.
    relative : bool
        Interpretation of ``rel_jsd_tol`` as above.

    Notes
    -----
    Batches double (never growing by fewer than 8 columns) until the
    stopping rule holds or the budget is gone.  If every column ends up
    sampled, ``mu`` equals ``||B||_F^2`` exactly up to roundoff, whatever
    the convergence flag says.
    """
    if not (rel_jsd_tol > 0.0):
        raise ValueError("rel_jsd_tol must be positive")
    col, _, _, n_total = _column_access(matrix)
    cap = n_total if max_cols is None else min(int(max_cols), n_total)
    if cap < 2:
        raise ValueError("need a budget of at least 2 columns")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_total)
    samples: list[float] = []
    target = min(max(int(min_cols), 2), cap)
    while True:
        while len(samples) < target:
            c = np.asarray(col(int(order[len(samples)])), dtype=np.float64)
            samples.append(n_total * float(c @ c))
        x = np.asarray(samples)
        m = x.size
        mu = float(x.mean())
        jsd = float(math.sqrt(float(((x - mu) ** 2).sum()) / (m * (m - 1))))
        threshold = rel_jsd_tol * mu if relative else rel_jsd_tol
        if jsd <= threshold:
            return NormEstimate(mu=mu, jsd=jsd, n_samples=m, converged=True)
        if target >= cap:
            return NormEstimate(mu=mu, jsd=jsd, n_samples=m, converged=False)
        target = min(cap, max(2 * target, target + 8))


def estimate_fro_via_coarse(coarse, eps_tilde: float) -> float:
    """Norm lower bound from a coarse compressed copy built at tolerance ``eps_tilde``.

    If ``coarse`` reproduces the matrix within relative error ``eps_tilde``
    in the Frobenius norm, then ``||coarse||_F / (1 + eps_tilde)`` never
    exceeds ``||B||_F``, so budgets scaled by it stay safe.
    """
    if not (0.0 <= eps_tilde < 1.0):
        raise ValueError("eps_tilde must lie in [0, 1)")
    return float(coarse.fro_norm()) / (1.0 + eps_tilde)


def exact_fro_norm(matrix, chunk: int = 1024) -> float:
    """``||B||_F`` by a full column sweep, chunked to bound memory."""
    col, block, _, n_cols = _column_access(matrix)
    total = 0.0
    if block is not None:
        for j0 in range(0, n_cols, chunk):
            b = np.asarray(block(np.arange(j0, min(j0 + chunk, n_cols))), dtype=np.float64)
            total += float((b * b).sum())
    else:
        for j in range(n_cols):
            c = np.asarray(col(j), dtype=np.float64)
            total += float(c @ c)
    return math.sqrt(total)


def induced_one_norm(matrix, chunk: int = 1024) -> float:
    """``||B||_1 = max_j sum_i |B[i, j]|`` by a full column sweep."""
    col, block, _, n_cols = _column_access(matrix)
    best = 0.0
    if block is not None:
        for j0 in range(0, n_cols, chunk):
            b = np.asarray(block(np.arange(j0, min(j0 + chunk, n_cols))), dtype=np.float64)
            best = max(best, float(np.abs(b).sum(axis=0).max()))
    else:
        for j in range(n_cols):
            c = np.asarray(col(j), dtype=np.float64)
            best = max(best, float(np.abs(c).sum()))
    return best
