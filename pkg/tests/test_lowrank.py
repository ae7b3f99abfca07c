"""Tests for ACA, the outer-product SVD, and budgeted recompression."""

import numpy as np
import pytest

from hmat.lowrank import (
    LowRankFactors,
    OuterProductSVD,
    StopCriterion,
    aca,
    build_block,
    outer_product_svd,
    stage_tolerances,
    truncate_fro,
    truncate_maxnorm,
)
from hmat.tolerances import BlockBudget, BudgetKind


def _kernel_block(m=32, n=32, power=2, gap=4.0, seed=0):
    """Entries 1/r^p between two well-separated random clusters."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 0.5, size=(m, 3))
    b = rng.uniform(0.0, 0.5, size=(n, 3)) + np.array([gap, 0.0, 0.0])
    r = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return r**-power


class _CountingBlock:
    """Array-backed oracle that counts row/column evaluations."""

    def __init__(self, a):
        self.a = a
        self.rows_read = 0
        self.cols_read = 0

    @property
    def shape(self):
        return self.a.shape

    def row(self, i):
        self.rows_read += 1
        return self.a[i, :]

    def col(self, j):
        self.cols_read += 1
        return self.a[:, j]


def test_aca_reproduces_a_rank_one_block_exactly():
    rng = np.random.default_rng(1)
    block = np.outer(rng.standard_normal(20), rng.standard_normal(15))
    out = aca(block, StopCriterion(kind=BudgetKind.RELATIVE_FRO, tol=1e-10))
    assert out.rank == 1
    assert not out.hit_max_rank
    assert np.linalg.norm(block - out.to_dense()) <= 1e-12 * np.linalg.norm(block)


def test_aca_returns_rank_zero_for_a_zero_block():
    out = aca(np.zeros((10, 7)), StopCriterion(kind=BudgetKind.ABSOLUTE_FRO, tol=1e-3))
    assert out.rank == 0
    assert out.nnz == 0
    assert out.shape == (10, 7)
    assert not out.hit_max_rank
    np.testing.assert_array_equal(out.to_dense(), np.zeros((10, 7)))


def test_aca_terminates_at_the_exact_rank():
    rng = np.random.default_rng(4)
    block = rng.standard_normal((40, 3)) @ rng.standard_normal((3, 30))
    out = aca(block, StopCriterion(kind=BudgetKind.RELATIVE_FRO, tol=1e-12))
    assert out.rank == 3
    assert np.linalg.norm(block - out.to_dense()) <= 1e-10 * np.linalg.norm(block)


def test_aca_absolute_tolerance_is_met_within_factor_ten():
    block = _kernel_block()
    tol = 1e-8
    out = aca(block, StopCriterion(kind=BudgetKind.ABSOLUTE_FRO, tol=tol))
    assert not out.hit_max_rank
    assert np.linalg.norm(block - out.to_dense()) <= 10.0 * tol


def test_aca_relative_tolerance_is_met_within_factor_ten():
    block = _kernel_block(power=3, seed=5)
    tol = 1e-6
    out = aca(block, StopCriterion(kind=BudgetKind.RELATIVE_FRO, tol=tol))
    assert not out.hit_max_rank
    assert np.linalg.norm(block - out.to_dense()) <= 10.0 * tol * np.linalg.norm(block)
    assert out.rank < min(block.shape)


def test_aca_flags_an_unreachable_rank_cap():
    rng = np.random.default_rng(9)
    block = rng.standard_normal((24, 24))  # full rank, incompressible
    out = aca(block, StopCriterion(kind=BudgetKind.RELATIVE_FRO, tol=1e-10, max_rank=4))
    assert out.rank == 4
    assert out.hit_max_rank


def test_aca_reads_one_row_and_column_per_rank():
    oracle = _CountingBlock(_kernel_block(seed=7))
    out = aca(oracle, StopCriterion(kind=BudgetKind.RELATIVE_FRO, tol=1e-6))
    assert not out.hit_max_rank
    assert oracle.rows_read == out.rank
    # one column per accepted pivot, a couple discarded, and one or two
    # rounds of stop-verification probes (full width for a narrow block)
    n = oracle.shape[1]
    n_probe = n if n <= 64 else min(n, 8 + n // 16)
    assert oracle.cols_read <= out.rank + 2 + 2 * n_probe


def test_outer_product_svd_of_a_unit_cross():
    u = np.zeros((6, 1))
    v = np.zeros((4, 1))
    u[2, 0] = 1.0
    v[1, 0] = 1.0
    svd = outer_product_svd(LowRankFactors(u=u, v=v))
    np.testing.assert_allclose(svd.sigma, [1.0], atol=1e-15)
    assert svd.fro_norm() == pytest.approx(1.0)


def test_outer_product_svd_matches_dense_svd():
    # factors of diag(3, 4) padded into a 4x4: singular values [4, 3]
    u = np.zeros((4, 2))
    v = np.zeros((4, 2))
    u[0, 0], u[1, 1] = 3.0, 4.0
    v[0, 0], v[1, 1] = 1.0, 1.0
    factors = LowRankFactors(u=u, v=v)
    svd = outer_product_svd(factors)
    np.testing.assert_allclose(svd.sigma, [4.0, 3.0], atol=1e-14)
    expected = np.linalg.svd(factors.to_dense(), compute_uv=False)
    np.testing.assert_allclose(svd.sigma, expected[:2], atol=1e-14)


def test_outer_product_svd_reconstructs_and_is_orthonormal():
    rng = np.random.default_rng(13)
    for m, n, r in [(30, 20, 5), (8, 50, 3), (16, 16, 16)]:
        factors = LowRankFactors(
            u=rng.standard_normal((m, r)), v=rng.standard_normal((n, r))
        )
        svd = outer_product_svd(factors)
        dense = factors.to_dense()
        rebuilt = (svd.left * svd.sigma) @ svd.right.T
        assert np.linalg.norm(dense - rebuilt) <= 1e-12 * np.linalg.norm(dense)
        np.testing.assert_allclose(svd.left.T @ svd.left, np.eye(svd.rank), atol=1e-12)
        np.testing.assert_allclose(svd.right.T @ svd.right, np.eye(svd.rank), atol=1e-12)
        assert np.all(np.diff(svd.sigma) <= 0)
        assert np.all(svd.sigma >= 0)


def _orthonormal_svd(m, n, sigma, seed):
    rng = np.random.default_rng(seed)
    r = len(sigma)
    left, _ = np.linalg.qr(rng.standard_normal((m, r)))
    right, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return OuterProductSVD(left=left, sigma=np.asarray(sigma, dtype=float), right=right)


def test_truncate_fro_keeps_the_smallest_sufficient_rank():
    svd = _orthonormal_svd(10, 8, [4.0, 3.0], seed=2)
    out = truncate_fro(svd, budget=3.0)  # tail after k=1 is exactly 3
    assert out.rank == 1
    assert truncate_fro(svd, budget=0.0).rank == 2
    assert truncate_fro(svd, budget=5.0).rank == 0  # sqrt(16+9) = 5
    assert truncate_fro(svd, budget=5.0).nnz == 0


def test_truncate_fro_residual_equals_the_singular_tail():
    sigma = [10.0, 5.0, 1.0, 0.5, 0.01]
    svd = _orthonormal_svd(24, 18, sigma, seed=3)
    dense = (svd.left * svd.sigma) @ svd.right.T
    for budget in (0.02, 0.6, 1.2, 5.2, 20.0):
        out = truncate_fro(svd, budget)
        k = out.rank
        tail = np.sqrt(np.sum(np.asarray(sigma[k:]) ** 2))
        resid = np.linalg.norm(dense - out.to_dense())
        assert resid == pytest.approx(tail, rel=1e-10, abs=1e-12)
        assert tail <= budget
        if k > 0:  # k is minimal: one rank less would overshoot
            assert np.sqrt(np.sum(np.asarray(sigma[k - 1 :]) ** 2)) > budget


def test_truncate_maxnorm_trivial_budgets():
    svd = _orthonormal_svd(12, 9, [4.0, 2.0, 1.0], seed=4)
    assert truncate_maxnorm(svd, budget=0.0).rank == 3
    rank1 = _orthonormal_svd(12, 9, [4.0], seed=5)
    ceiling = 4.0 * np.abs(rank1.left).max() * np.abs(rank1.right).max()
    assert truncate_maxnorm(rank1, budget=ceiling + 1e-12).rank == 0


def test_truncate_maxnorm_matches_a_linear_scan_oracle():
    rng = np.random.default_rng(6)
    for trial in range(20):
        m, n = rng.integers(5, 40, size=2)
        r = int(rng.integers(1, 7))
        svd = _orthonormal_svd(int(m), int(n), np.sort(rng.uniform(0.1, 9.0, r))[::-1], seed=trial)
        dense = (svd.left * svd.sigma) @ svd.right.T
        budget = float(rng.uniform(0.0, 2.0))
        out = truncate_maxnorm(svd, budget)
        # smallest k whose dense deviation fits the budget
        expected_k = svd.rank
        for k in range(svd.rank + 1):
            approx = (svd.left[:, :k] * svd.sigma[:k]) @ svd.right[:, :k].T
            if np.abs(dense - approx).max() <= budget:
                expected_k = k
                break
        assert out.rank == expected_k


@pytest.mark.parametrize("op", [truncate_fro, truncate_maxnorm])
def test_truncation_rank_shrinks_with_budget(op):
    svd = _orthonormal_svd(20, 20, [8.0, 4.0, 2.0, 1.0, 0.5], seed=7)
    budgets = np.linspace(0.0, 10.0, 25)
    ranks = [op(svd, float(b)).rank for b in budgets]
    assert ranks == sorted(ranks, reverse=True)


def test_stage_tolerances_split_an_absolute_budget():
    budget = BlockBudget(kind=BudgetKind.ABSOLUTE_FRO, value=2e-3)
    stop, beta = stage_tolerances(budget, alpha=0.5, aca_safety=0.1)
    assert stop.kind is BudgetKind.ABSOLUTE_FRO
    assert stop.tol == pytest.approx(1e-4)  # budget / 20
    assert beta == pytest.approx(0.5)


def test_stage_tolerances_split_a_relative_budget():
    budget = BlockBudget(kind=BudgetKind.RELATIVE_FRO, value=1e-5)
    stop, beta = stage_tolerances(budget, alpha=0.5, aca_safety=0.1)
    assert stop.kind is BudgetKind.RELATIVE_FRO
    assert stop.tol == pytest.approx(5e-7)
    assert beta == pytest.approx(0.5 / (1.0 + 0.5e-5))
    assert beta == pytest.approx(0.4999975, abs=1e-7)
    with pytest.raises(ValueError):
        stage_tolerances(budget, alpha=1.5)
    with pytest.raises(ValueError):
        stage_tolerances(budget, alpha=0.5, aca_safety=0.0)


def test_build_block_respects_a_relative_budget():
    block = _kernel_block(m=48, n=40, power=2, seed=8)
    eps = 1e-5
    out = build_block(block, BlockBudget(kind=BudgetKind.RELATIVE_FRO, value=eps))
    assert not out.hit_max_rank
    assert np.linalg.norm(block - out.to_dense()) <= eps * np.linalg.norm(block)


def test_build_block_respects_an_absolute_budget():
    block = _kernel_block(m=40, n=48, power=1, seed=10)
    tau = 1e-6
    out = build_block(block, BlockBudget(kind=BudgetKind.ABSOLUTE_FRO, value=tau))
    assert not out.hit_max_rank
    assert np.linalg.norm(block - out.to_dense()) <= tau


def test_build_block_respects_an_entrywise_budget():
    block = _kernel_block(m=32, n=32, power=2, seed=11)
    tau = 1e-6
    out = build_block(block, BlockBudget(kind=BudgetKind.ABSOLUTE_MAX, value=tau))
    assert not out.hit_max_rank
    assert np.abs(block - out.to_dense()).max() <= tau


def test_build_block_keeps_the_exact_rank_low():
    rng = np.random.default_rng(14)
    block = rng.standard_normal((50, 4)) @ rng.standard_normal((4, 36))
    out = build_block(
        block, BlockBudget(kind=BudgetKind.RELATIVE_FRO, value=1e-8)
    )
    assert out.rank <= 4
    assert np.linalg.norm(block - out.to_dense()) <= 1e-8 * np.linalg.norm(block)


def test_build_block_with_a_generous_budget_returns_rank_zero():
    block = _kernel_block(m=16, n=16, seed=15)
    budget = BlockBudget(kind=BudgetKind.ABSOLUTE_FRO, value=10.0 * np.linalg.norm(block))
    out = build_block(block, budget)
    assert out.rank == 0


def test_build_block_propagates_the_rank_cap_flag():
    rng = np.random.default_rng(16)
    block = rng.standard_normal((24, 24))
    out = build_block(
        block, BlockBudget(kind=BudgetKind.RELATIVE_FRO, value=1e-10), max_rank=3
    )
    assert out.hit_max_rank


def test_stop_criterion_rejects_entrywise_kind():
    with pytest.raises(ValueError):
        StopCriterion(kind=BudgetKind.ABSOLUTE_MAX, tol=1e-3)
    with pytest.raises(ValueError):
        StopCriterion(kind=BudgetKind.ABSOLUTE_FRO, tol=0.0)
