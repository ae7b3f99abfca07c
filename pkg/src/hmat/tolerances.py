"""Mapping a matrix-wide tolerance to per-block error budgets.

Three methods are implemented.  Writing ``B`` for the full ``N x N`` matrix
and ``B_i`` for an ``m x n`` block:

``BREM`` (block relative-error method)
    Every block gets the same relative Frobenius tolerance ``eps``.  Then
    ``||E||_F <= eps * ||B||_F`` follows from summing squares blockwise.

``MREM`` (matrix relative-error method)
    Every block gets the absolute Frobenius budget
    ``eps * sqrt(m * n) / N * ||B||_F``, i.e. a uniform error share per
    entry.  The budgets satisfy ``sum_i budget_i^2 = eps^2 * ||B||_F^2``
    over any tiling, so the same global bound holds while blocks with
    small Frobenius mass per entry are approximated far more coarsely.

``MREMmax`` (max-norm variant)
    Every block gets the absolute entrywise budget
    ``eps_bar = eps * ||B||_1 / N`` (induced 1-norm), which gives the
    elementwise bound ``||E||_max <= eps_bar``.

MREM and MREMmax need a matrix norm up front; BREM does not.  Neither BREM
nor MREM dominates the other blockwise: whether a block's MREM budget
exceeds its BREM budget depends on the block's Frobenius mass per entry
relative to the matrix average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .normest import NormEstimate, UnconvergedEstimateError

__all__ = [
    "Method",
    "BudgetKind",
    "BlockBudget",
    "TolerancePolicy",
    "GlobalBoundCheck",
    "block_budget",
    "fnpe",
    "verify_global_bound",
]


class Method(str, Enum):
    BREM = "BREM"
    MREM = "MREM"
    MREMMAX = "MREMmax"

    @classmethod
    def parse(cls, text: str) -> "Method":
        for m in cls:
            if m.value.lower() == text.strip().lower():
                return m
        raise ValueError(f"unknown method: {text!r}")


class BudgetKind(Enum):
    """How a block budget value is to be interpreted by the approximation."""

    RELATIVE_FRO = "relative-fro"
    ABSOLUTE_FRO = "absolute-fro"
    ABSOLUTE_MAX = "absolute-max"


@dataclass(frozen=True)
class BlockBudget:
    """A per-block error allowance: a positive value plus its interpretation."""

    kind: BudgetKind
    value: float

    def __post_init__(self) -> None:
        if not (self.value > 0.0 and math.isfinite(self.value)):
            raise ValueError("block budget value must be positive and finite")


@dataclass(frozen=True)
class TolerancePolicy:
    """A method, a requested tolerance ``eps``, the matrix size, and, for the
    matrix-wise methods, the matrix norm they scale by.

    ``matrix_norm`` is the Frobenius norm for MREM and the induced 1-norm
    for MREMmax; it must be present (and positive) exactly when the method
    needs it, and absent for BREM.
    """

    method: Method
    epsilon: float
    n: int
    matrix_norm: float | None = None

    def __post_init__(self) -> None:
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive and finite")
        if self.n < 1:
            raise ValueError("matrix size must be at least 1")
        if self.method is Method.BREM:
            if self.matrix_norm is not None:
                raise ValueError("BREM takes no matrix norm")
        else:
            if self.matrix_norm is None or not (
                self.matrix_norm > 0.0 and math.isfinite(self.matrix_norm)
            ):
                raise ValueError(f"{self.method.value} requires a positive matrix norm")

    @classmethod
    def from_estimate(
        cls,
        method: Method,
        epsilon: float,
        n: int,
        estimate: NormEstimate,
        *,
        allow_unconverged: bool = False,
    ) -> "TolerancePolicy":
        """Build an MREM policy from a stochastic Frobenius-norm estimate.

        Uses the safety-adjusted norm (two jackknife standard deviations
        below the mean) so an under-estimated norm cannot loosen the
        budgets.  Refuses an unconverged estimate unless explicitly allowed.
        """
        if method is not Method.MREM:
            raise ValueError("norm estimates feed MREM policies only")
        if not estimate.converged and not allow_unconverged:
            raise UnconvergedEstimateError(
                "norm estimate did not converge; pass allow_unconverged=True to override"
            )
        return cls(method=method, epsilon=epsilon, n=n, matrix_norm=estimate.safe_fro_norm)


def block_budget(policy: TolerancePolicy, m: int, n: int) -> BlockBudget:
    """The error budget an ``m x n`` block receives under ``policy``."""
    if m < 1 or n < 1:
        raise ValueError("block dimensions must be positive")
    if policy.method is Method.BREM:
        return BlockBudget(BudgetKind.RELATIVE_FRO, policy.epsilon)
    if policy.method is Method.MREM:
        value = policy.epsilon * math.sqrt(m * n) / policy.n * policy.matrix_norm
        return BlockBudget(BudgetKind.ABSOLUTE_FRO, value)
    value = policy.epsilon * policy.matrix_norm / policy.n
    return BlockBudget(BudgetKind.ABSOLUTE_MAX, value)


def fnpe(fro_norm_sq: float, m: int, n: int) -> float:
    """Frobenius norm squared per entry, ``fro_norm_sq / (m * n)``.

    This is the quantity MREM equalises error against: a block whose FNPE
    is below the matrix average gets a looser budget than under BREM, and
    vice versa.
    """
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    if fro_norm_sq < 0.0:
        raise ValueError("fro_norm_sq must be nonnegative")
    return fro_norm_sq / (m * n)


@dataclass(frozen=True)
class GlobalBoundCheck:
    """Outcome of checking ``||E||_F <= eps * ||B||_F`` over a tiling."""

    satisfied: bool
    achieved_error: float
    allowed_error: float
    ratio: float


def verify_global_bound(
    block_errors: list[tuple[int, int, float]],
    policy: TolerancePolicy,
    true_fro_norm: float,
) -> GlobalBoundCheck:
    """Aggregate per-block Frobenius errors and compare to the global bound.

    Parameters
    ----------
    block_errors : list of (m, n, err) triples
        Block dimensions and achieved Frobenius error per block.  The
        dimensions must tile the full matrix: ``sum(m * n) == N * N``.
    policy : TolerancePolicy
        Supplies ``eps`` and ``N``.
    true_fro_norm : float
        The matrix Frobenius norm the bound is taken against (exact or a
        trusted estimate; the caller labels which).
    """
    if true_fro_norm < 0.0:
        raise ValueError("true_fro_norm must be nonnegative")
    area = 0
    err_sq = 0.0
    for m, n, err in block_errors:
        if m < 1 or n < 1:
            raise ValueError("block dimensions must be positive")
        if err < 0.0:
            raise ValueError("block errors must be nonnegative")
        area += m * n
        err_sq += err * err
    if area != policy.n * policy.n:
        raise ValueError(
            f"block dimensions cover {area} entries, expected {policy.n * policy.n}"
        )
    achieved = math.sqrt(err_sq)
    allowed = policy.epsilon * true_fro_norm
    ratio = achieved / allowed if allowed > 0.0 else math.inf if achieved > 0.0 else 0.0
    return GlobalBoundCheck(
        satisfied=achieved <= allowed,
        achieved_error=achieved,
        allowed_error=allowed,
        ratio=ratio,
    )
