"""Tests for exact and stochastic Frobenius-norm computation."""

import numpy as np
import pytest

from hmat.assembly import BuildConfig, assemble
from hmat.geometry import Geometry, Kernel, KernelMatrix, generate_points
from hmat.normest import (
    NormEstimate,
    estimate_fro_stochastic,
    estimate_fro_via_coarse,
    exact_fro_norm,
    induced_one_norm,
)
from hmat.tolerances import Method, TolerancePolicy


def test_equal_column_mass_converges_immediately():
    # every column has the same sum of squares s, so the sampler sees zero
    # variance: X_j = N*s for all j and the jackknife deviation vanishes
    n, s = 32, 4.0
    matrix = np.diag(np.full(n, np.sqrt(s)))
    est = estimate_fro_stochastic(matrix, seed=0, min_cols=8)
    assert est.converged
    assert est.n_samples == 8
    assert est.jsd == 0.0
    assert est.mu == pytest.approx(n * s)
    assert est.safe_fro_norm == pytest.approx(np.sqrt(n * s))


def test_zero_matrix_estimates_zero():
    est = estimate_fro_stochastic(np.zeros((16, 16)), seed=1)
    assert est.mu == 0.0
    assert est.jsd == 0.0
    assert est.safe_fro_norm == 0.0


def test_random_matrix_coverage_over_seeds():
    # mu estimates ||B||_F^2 with jackknife deviation jsd; by the delta
    # method sqrt(mu) has relative deviation jsd/(2 mu), so a 3-deviation
    # interval should cover the exact norm in nearly all runs
    rng = np.random.default_rng(2024)
    matrix = rng.standard_normal((256, 256))
    exact = np.linalg.norm(matrix)
    hits = 0
    for seed in range(100):
        est = estimate_fro_stochastic(matrix, seed=seed)
        assert est.converged
        half_width = 3.0 * est.jsd / (2.0 * est.mu)
        hits += abs(np.sqrt(est.mu) - exact) / exact <= half_width
    assert hits >= 95


def test_full_sampling_reproduces_the_exact_norm():
    rng = np.random.default_rng(5)
    matrix = rng.standard_normal((64, 64)) * rng.uniform(0.1, 10.0, size=64)
    est = estimate_fro_stochastic(matrix, rel_jsd_tol=1e-12, seed=3)
    assert est.n_samples == 64
    assert not est.converged
    assert np.sqrt(est.mu) == pytest.approx(np.linalg.norm(matrix), rel=1e-12)


def test_estimate_is_deterministic_in_seed():
    rng = np.random.default_rng(8)
    matrix = rng.standard_normal((128, 128)) * np.logspace(0, 2, 128)
    a = estimate_fro_stochastic(matrix, seed=11)
    b = estimate_fro_stochastic(matrix, seed=11)
    assert (a.mu, a.jsd, a.n_samples, a.converged) == (b.mu, b.jsd, b.n_samples, b.converged)


def test_unconverged_flag_when_budget_exhausted():
    rng = np.random.default_rng(6)
    matrix = rng.standard_normal((64, 64)) * np.logspace(0, 3, 64)
    est = estimate_fro_stochastic(matrix, rel_jsd_tol=1e-9, min_cols=2, max_cols=4, seed=0)
    assert not est.converged
    assert est.n_samples == 4


def test_safe_norm_never_exceeds_the_raw_estimate():
    rng = np.random.default_rng(12)
    for trial in range(10):
        matrix = rng.standard_normal((64, 64)) * rng.uniform(0.5, 2.0)
        est = estimate_fro_stochastic(matrix, seed=trial)
        assert est.safe_fro_norm <= np.sqrt(est.mu) + 1e-15
    est = NormEstimate(mu=1.0, jsd=10.0, n_samples=4, converged=False)
    assert est.safe_fro_norm == 0.0


def test_estimator_accepts_kernel_matrix_oracle():
    cloud = generate_points(Geometry.SURF, 96, 4)
    km = KernelMatrix(cloud, Kernel.inverse_power(1))
    dense = km.dense()
    est_oracle = estimate_fro_stochastic(km, seed=9)
    est_dense = estimate_fro_stochastic(dense, seed=9)
    assert est_oracle.mu == pytest.approx(est_dense.mu, rel=1e-14)
    assert est_oracle.n_samples == est_dense.n_samples


def test_coarse_norm_arithmetic():
    class Fake:
        def fro_norm(self):
            return 3.0

    assert estimate_fro_via_coarse(Fake(), 0.5) == pytest.approx(2.0)
    assert estimate_fro_via_coarse(Fake(), 0.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        estimate_fro_via_coarse(Fake(), 1.0)


def test_coarse_norm_lower_bounds_the_true_norm():
    # a compressed copy built at tolerance eps_tilde can overshoot the true
    # norm by at most a factor (1 + eps_tilde); dividing it back out gives
    # a certified lower bound
    cloud = generate_points(Geometry.CUBE, 128, 17)
    kernel = Kernel.inverse_power(2)
    exact = exact_fro_norm(KernelMatrix(cloud, kernel))
    for eps_tilde in (0.5, 0.1):
        policy = TolerancePolicy(method=Method.BREM, epsilon=eps_tilde, n=128)
        coarse, _ = assemble(cloud, kernel, BuildConfig(policy=policy, leaf_size=16))
        assert estimate_fro_via_coarse(coarse, eps_tilde) <= exact


def test_exact_fro_norm_matches_dense_oracle():
    cloud = generate_points(Geometry.EDGE, 150, 7)
    km = KernelMatrix(cloud, Kernel.log())
    dense = km.dense()
    assert exact_fro_norm(km) == pytest.approx(np.linalg.norm(dense), rel=1e-13)
    assert exact_fro_norm(dense, chunk=32) == pytest.approx(np.linalg.norm(dense), rel=1e-13)


def test_induced_one_norm_worked_values():
    assert induced_one_norm(np.zeros((5, 5))) == 0.0
    single = np.zeros((4, 4))
    single[2, 1] = 5.0
    assert induced_one_norm(single) == 5.0
    hollow = np.ones((3, 3)) - np.eye(3)
    assert induced_one_norm(hollow) == 2.0


def test_induced_one_norm_matches_dense_oracle():
    cloud = generate_points(Geometry.SURF, 120, 15)
    km = KernelMatrix(cloud, Kernel.inverse_power(3))
    dense = km.dense()
    expected = np.abs(dense).sum(axis=0).max()
    assert induced_one_norm(km, chunk=17) == pytest.approx(expected, rel=1e-13)
