"""Low-rank block approximation: partially pivoted ACA plus SVD recompression.

A block is approximated in two stages.  Stage one runs adaptive cross
approximation (ACA) with partial pivoting at a deliberately tight tolerance,
``alpha * budget * aca_safety``; the safety factor (default 1/10) absorbs
ACA's habit of landing within roughly a factor of ten of its stopping
tolerance on either side.  Stage two computes a thin SVD of the cross
approximation through QR factors of ``U`` and ``V`` only (never forming the
dense block) and truncates it against the remaining budget, so the final
rank is near-minimal for the error actually delivered.

Budget bookkeeping for the split: with ACA contributing at most
``alpha * eps`` of the budget, truncation may spend ``beta = 1 - alpha``
of an absolute budget, or ``beta = (1 - alpha) / (1 + alpha * eps)`` of a
relative one (the truncation tail is measured against the stage-one
approximation rather than the block itself, whose norms differ by at most
``1 + alpha * eps``).

Max-norm budgets are truncated against the entrywise deviation directly,
by binary search on the retained rank; each probe forms the deviation of a
candidate tail, which is affordable because blocks are modest and the
search touches ``O(log r)`` candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tolerances import BlockBudget, BudgetKind

__all__ = [
    "LowRankFactors",
    "OuterProductSVD",
    "StopCriterion",
    "aca",
    "outer_product_svd",
    "truncate_fro",
    "truncate_maxnorm",
    "stage_tolerances",
    "build_block",
]

_EPS = float(np.finfo(np.float64).eps)


@dataclass
class LowRankFactors:
    """A rank-``r`` factorisation ``u @ v.T`` with ``u`` of shape ``(m, r)``
    and ``v`` of shape ``(n, r)``.  Rank 0 (empty factors) represents the
    zero block and stores nothing."""

    u: np.ndarray
    v: np.ndarray
    hit_max_rank: bool = False

    def __post_init__(self) -> None:
        if self.u.ndim != 2 or self.v.ndim != 2 or self.u.shape[1] != self.v.shape[1]:
            raise ValueError("factors must be (m, r) and (n, r) with matching r")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u.shape[0], self.v.shape[0])

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    @property
    def nnz(self) -> int:
        """Stored floats: ``(m + n) * r``."""
        return self.u.size + self.v.size

    def to_dense(self) -> np.ndarray:
        return self.u @ self.v.T


@dataclass
class OuterProductSVD:
    """Thin SVD ``left @ diag(sigma) @ right.T`` of a low-rank outer product."""

    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return self.sigma.size

    def fro_norm(self) -> float:
        return float(np.sqrt((self.sigma**2).sum()))


@dataclass(frozen=True)
class StopCriterion:
    """ACA stopping rule: ``kind`` picks the test, ``tol`` its level.

    ``RELATIVE_FRO`` stops when ``||u_k|| * ||v_k|| <= tol * ||approx_k||_F``
    (the approximation's Frobenius norm is maintained incrementally);
    ``ABSOLUTE_FRO`` stops when ``||u_k|| * ||v_k|| <= tol``.  ``max_rank``
    bounds the rank regardless; by default ``min(m, n)``.
    """

    kind: BudgetKind
    tol: float
    max_rank: int | None = None

    def __post_init__(self) -> None:
        if self.kind is BudgetKind.ABSOLUTE_MAX:
            raise ValueError("ACA cannot stop on an entrywise budget; use a Frobenius kind")
        if not (self.tol > 0.0 and math.isfinite(self.tol)):
            raise ValueError("tol must be positive and finite")
        if self.max_rank is not None and self.max_rank < 1:
            raise ValueError("max_rank must be at least 1")


def _as_block(obj):
    if isinstance(obj, np.ndarray):
        return _ArrayBlock(obj)
    return obj


class _ArrayBlock:
    """Adapter giving a dense array the row/col oracle surface."""

    def __init__(self, a: np.ndarray) -> None:
        self._a = np.asarray(a, dtype=np.float64)
        if self._a.ndim != 2:
            raise ValueError("expected a 2-d array")

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def row(self, i: int) -> np.ndarray:
        return self._a[i]

    def col(self, j: int) -> np.ndarray:
        return self._a[:, j]

    def dense(self) -> np.ndarray:
        return self._a


def aca(block, stop: StopCriterion) -> LowRankFactors:
    """Adaptive cross approximation with partial pivoting.

    The pivot walk is column-major: within the current column the pivot row
    maximises the residual magnitude over unused rows, and the residual
    along that row then proposes the next column (again over unused
    columns).  Rows and columns are evaluated through the block oracle only
    as needed, so a rank-``r`` result reads ``r`` rows and about ``r``
    columns plus verification probes and whatever columns pivot scanning
    discards as numerically zero.

    The size of the newest term is only a proxy for the distance still to
    go, and on smooth kernels the walk can wander into a subspace where
    terms shrink while the true residual stalls.  A candidate stop is
    therefore verified against probed residual columns -- every column for
    narrow blocks, a random sample (an unbiased Frobenius estimate) for
    wide ones -- and a failed check restarts the walk at the worst probed
    column instead of returning early.

    A residual entry counts as zero below a noise floor scaled to the
    largest raw entry seen so far; this is what lets exactly-low-rank
    blocks terminate at their true rank instead of chasing roundoff, and
    lets an all-zero block come back with rank 0.

    Returns factors flagged ``hit_max_rank`` when the rank cap was reached
    before the stopping rule was met (the result is then not trusted to
    satisfy the tolerance; callers typically fall back to dense storage).
    """
    block = _as_block(block)
    m, n = block.shape
    cap = min(m, n)
    if stop.max_rank is not None:
        cap = min(cap, stop.max_rank)
    u_store = np.empty((m, cap), dtype=np.float64)
    v_store = np.empty((n, cap), dtype=np.float64)
    used_row = np.zeros(m, dtype=bool)
    tried_col = np.zeros(n, dtype=bool)
    rank = 0
    approx_sq = 0.0
    ref = 0.0
    met = False
    j = 0
    have_j = True
    probe_rng = np.random.default_rng(0)
    # narrow blocks are verified exhaustively (the exact residual costs no
    # more than a dense pass and removes any chance of a missed hot column);
    # wide ones get an unbiased sample
    n_probe = n if n <= 64 else min(n, 8 + n // 16)

    def floor(r: int) -> float:
        return ref * _EPS * 32.0 * max(r, 1)

    def probe_residual() -> tuple[float, int, float]:
        """Unbiased ``||B - approx||_F^2`` estimate from random columns.

        Returns the estimate, the probed column with the largest residual,
        and that column's largest residual magnitude.
        """
        nonlocal ref
        cols = probe_rng.choice(n, size=n_probe, replace=False)
        raw = np.stack([np.asarray(block.col(int(c)), dtype=np.float64) for c in cols], axis=1)
        if raw.size:
            ref = max(ref, float(np.abs(raw).max()))
        resid = raw - u_store[:, :rank] @ v_store[cols, :rank].T
        col_sq = (resid * resid).sum(axis=0)
        worst = int(np.argmax(col_sq))
        peak = float(np.abs(resid[:, worst]).max())
        return float(col_sq.sum()) * (n / n_probe), int(cols[worst]), peak

    while rank < cap:
        # Find a usable pivot column, scanning past numerically zero ones.
        pivot_i = -1
        resid_col = None
        while True:
            if not have_j:
                remaining = np.flatnonzero(~tried_col)
                if remaining.size == 0:
                    break
                j = int(remaining[0])
            raw_col = np.asarray(block.col(j), dtype=np.float64)
            if raw_col.size:
                ref = max(ref, float(np.abs(raw_col).max()))
            resid_col = raw_col - u_store[:, :rank] @ v_store[j, :rank]
            tried_col[j] = True
            have_j = False
            scores = np.abs(resid_col)
            scores[used_row] = -1.0
            i = int(np.argmax(scores))
            if scores[i] > floor(rank):
                pivot_i = i
                break
        if pivot_i < 0:
            met = True  # residual exhausted: the block is reproduced exactly
            break
        pivot = float(resid_col[pivot_i])
        raw_row = np.asarray(block.row(pivot_i), dtype=np.float64)
        ref = max(ref, float(np.abs(raw_row).max()))
        resid_row = raw_row - v_store[:, :rank] @ u_store[pivot_i, :rank]
        u_k = resid_col
        v_k = resid_row / pivot
        term_sq = float(u_k @ u_k) * float(v_k @ v_k)
        if rank:
            cross = 2.0 * float((u_store[:, :rank].T @ u_k) @ (v_store[:, :rank].T @ v_k))
        else:
            cross = 0.0
        approx_sq = max(approx_sq + cross + term_sq, 0.0)
        u_store[:, rank] = u_k
        v_store[:, rank] = v_k
        used_row[pivot_i] = True
        rank += 1
        term = math.sqrt(term_sq)
        if stop.kind is BudgetKind.ABSOLUTE_FRO:
            threshold = stop.tol
        else:
            threshold = stop.tol * math.sqrt(approx_sq)
        if term <= threshold:
            # the term proxy says done; trust it only if probed residual
            # columns agree to within a small factor or sit at the
            # roundoff floor
            est_sq, worst_col, worst_peak = probe_residual()
            if math.sqrt(est_sq) <= 4.0 * threshold or worst_peak <= floor(rank):
                met = True
                break
            if not tried_col[worst_col]:
                # restart the walk where the probe saw the residual
                j = worst_col
                have_j = True
                continue
        # Next column: largest residual along the pivot row, unused columns only.
        scores = np.abs(resid_row)
        scores[tried_col] = -1.0
        j2 = int(np.argmax(scores))
        if scores[j2] > floor(rank):
            j = j2
            have_j = True
    if not met and rank == min(m, n):
        # a full complement of crosses interpolates every row (or column)
        # of the block, so the reproduction is exact up to roundoff even
        # though the term-size test never fired
        met = True
    return LowRankFactors(
        u=u_store[:, :rank].copy(),
        v=v_store[:, :rank].copy(),
        hit_max_rank=not met,
    )


def outer_product_svd(factors: LowRankFactors) -> OuterProductSVD:
    """Thin SVD of ``u @ v.T`` computed through QR of the factors.

    Cost is ``O((m + n) r^2 + r^3)``; the dense block is never formed.  The
    returned singular values are nonincreasing and the reconstruction
    matches ``u @ v.T`` to roundoff.
    """
    m, n = factors.shape
    r = factors.rank
    if r == 0:
        return OuterProductSVD(
            left=np.zeros((m, 0)), sigma=np.zeros(0), right=np.zeros((n, 0))
        )
    qu, ru = np.linalg.qr(factors.u)
    qv, rv = np.linalg.qr(factors.v)
    w, sigma, zt = np.linalg.svd(ru @ rv.T, full_matrices=False)
    return OuterProductSVD(left=qu @ w, sigma=sigma, right=qv @ zt.T)


def _factors_from_svd(svd: OuterProductSVD, k: int, hit: bool = False) -> LowRankFactors:
    return LowRankFactors(
        u=svd.left[:, :k] * svd.sigma[:k],
        v=svd.right[:, :k].copy(),
        hit_max_rank=hit,
    )


def truncate_fro(svd: OuterProductSVD, budget: float) -> LowRankFactors:
    """Keep the fewest singular triplets whose discarded tail satisfies
    ``sqrt(sum of squared discarded sigmas) <= budget``.

    Rank 0 is a legal outcome (budget at least the whole norm); a budget of
    0 keeps everything.
    """
    if budget < 0.0:
        raise ValueError("budget must be nonnegative")
    sq = svd.sigma**2
    tails = np.sqrt(np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]]))
    k = int(np.argmax(tails <= budget))
    return _factors_from_svd(svd, k)


def _max_deviation(svd: OuterProductSVD, k: int) -> float:
    """Entrywise magnitude of the tail discarded when keeping ``k`` triplets."""
    if k >= svd.rank:
        return 0.0
    tail = (svd.left[:, k:] * svd.sigma[k:]) @ svd.right[:, k:].T
    return float(np.abs(tail).max())


def truncate_maxnorm(svd: OuterProductSVD, budget: float) -> LowRankFactors:
    """Keep the fewest triplets whose discarded tail has max-norm within ``budget``.

    Binary search over the retained rank; each probe forms the candidate
    tail densely, so the search costs ``O(m n log r)``.
    """
    if budget < 0.0:
        raise ValueError("budget must be nonnegative")
    lo, hi = 0, svd.rank
    while lo < hi:
        mid = (lo + hi) // 2
        if _max_deviation(svd, mid) <= budget:
            hi = mid
        else:
            lo = mid + 1
    return _factors_from_svd(svd, lo)


def stage_tolerances(
    budget: BlockBudget, alpha: float = 0.5, aca_safety: float = 0.1
) -> tuple[StopCriterion, float]:
    """Split a block budget into the ACA stopping rule and the truncation share.

    Returns the stage-one :class:`StopCriterion` (tolerance
    ``alpha * budget.value * aca_safety``, Frobenius-relative exactly when
    the budget is) and ``beta``, the fraction of the budget truncation may
    spend: ``1 - alpha`` for absolute budgets and
    ``(1 - alpha) / (1 + alpha * eps)`` for a relative budget ``eps``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < aca_safety <= 1.0:
        raise ValueError("aca_safety must lie in (0, 1]")
    if budget.kind is BudgetKind.RELATIVE_FRO:
        kind = BudgetKind.RELATIVE_FRO
        beta = (1.0 - alpha) / (1.0 + alpha * budget.value)
    else:
        kind = BudgetKind.ABSOLUTE_FRO
        beta = 1.0 - alpha
    return StopCriterion(kind=kind, tol=alpha * budget.value * aca_safety), beta


def build_block(
    block,
    budget: BlockBudget,
    *,
    alpha: float = 0.5,
    aca_safety: float = 0.1,
    max_rank: int | None = None,
) -> LowRankFactors:
    """Approximate one block to its budget: tight ACA, then recompression.

    The returned factors carry ``hit_max_rank`` through from ACA; when set,
    the budget is not guaranteed and the caller should store the block
    densely instead.
    """
    stop, beta = stage_tolerances(budget, alpha, aca_safety)
    if max_rank is not None:
        stop = StopCriterion(kind=stop.kind, tol=stop.tol, max_rank=max_rank)
    first = aca(block, stop)
    if first.rank == 0:
        return first
    svd = outer_product_svd(first)
    if budget.kind is BudgetKind.RELATIVE_FRO:
        final = truncate_fro(svd, beta * budget.value * svd.fro_norm())
    elif budget.kind is BudgetKind.ABSOLUTE_FRO:
        final = truncate_fro(svd, beta * budget.value)
    else:
        final = truncate_maxnorm(svd, beta * budget.value)
    final.hit_max_rank = first.hit_max_rank
    return final
