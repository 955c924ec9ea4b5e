import math

import numpy as np
import pytest
import scipy.linalg

from ridge_sketch.oracle import (
    OracleTooLarge,
    cond_preconditioned,
    direct_solve,
    lemma_u1,
    measure_epsilon_classic,
    measure_epsilon_statdim,
)
from ridge_sketch.precond import CholeskyPreconditioner, build_cholesky, build_gram, exact_sd
from ridge_sketch.sketch import EmbeddingSpec, draw_embedding

from conftest import make_problem


def test_direct_identity(rng):
    b = rng.standard_normal(4)
    np.testing.assert_allclose(direct_solve(np.eye(4), b, 1.0), b / 2, rtol=1e-15)


def test_direct_unregularized():
    b = np.array([1.0, 3.0])
    np.testing.assert_allclose(direct_solve(2 * np.eye(2), b, 0.0), b / 2, rtol=1e-15)


def test_direct_pseudo_inverse_underdetermined(rng):
    A = rng.standard_normal((3, 7))
    b = rng.standard_normal(3)
    np.testing.assert_allclose(direct_solve(A, b, 0.0), np.linalg.pinv(A) @ b, rtol=1e-12)


@pytest.mark.parametrize("shape", [(30, 8), (8, 30)])
def test_local_optimality(rng, shape):
    A = rng.standard_normal(shape)
    b = rng.standard_normal(shape[0])
    lam = 0.3
    x = direct_solve(A, b, lam)

    def f(z):
        return np.sum((A @ z - b) ** 2) + lam * np.sum(z**2)

    base = f(x)
    for _ in range(200):
        d = rng.standard_normal(shape[1])
        assert f(x + 1e-3 * d / np.linalg.norm(d)) >= base


@pytest.mark.parametrize("shape", [(50, 10), (10, 50)])
def test_normal_equations(rng, shape):
    problem = make_problem(*shape)
    A, b = problem.A, problem.b
    x = direct_solve(A, b, 1e-4)
    Atb = A.T @ b
    assert np.linalg.norm(A.T @ (A @ x) + 1e-4 * x - Atb) <= 1e-10 * np.linalg.norm(Atb)


def test_cond_exact_embedding(rng):
    A = rng.standard_normal((40, 6))
    p = build_cholesky(A.T @ A, 1e-3)
    assert cond_preconditioned(A, 1e-3, p) == pytest.approx(1.0, abs=1e-8)


def test_cond_large_lambda(rng):
    A = rng.standard_normal((40, 6))
    X = draw_embedding(EmbeddingSpec("gaussian", 10, 0), 40).to_dense()
    lam = 1e12 * scipy.linalg.svdvals(A)[0] ** 2
    p = build_cholesky(build_gram(X @ A), lam)
    assert cond_preconditioned(A, lam, p) == pytest.approx(1.0, abs=1e-8)


def test_cond_singular_is_infinite(rng):
    p = CholeskyPreconditioner(np.diag([1.0, 0.0]), 1.0)
    assert cond_preconditioned(rng.standard_normal((5, 2)), 1.0, p) == math.inf


def test_cond_gaussian_bound():
    A = make_problem(2000, 50, seed=3).A
    X = draw_embedding(EmbeddingSpec("gaussian", 200, 3), 2000).to_dense()
    eps = measure_epsilon_classic(X, A)
    p = build_cholesky(build_gram(X @ A), 1e-4)
    assert cond_preconditioned(A, 1e-4, p) <= (1 + eps) / (1 - eps) * (1 + 1e-8)


def test_epsilon_classic_exact_and_degenerate(rng):
    A = rng.standard_normal((12, 3))
    assert measure_epsilon_classic(np.eye(12), A) == pytest.approx(0.0, abs=1e-14)
    assert measure_epsilon_classic(rng.standard_normal((1, 12)), A) >= 1.0
    W = rng.standard_normal((3, 12))
    assert measure_epsilon_classic(np.eye(12), W) == pytest.approx(0.0, abs=1e-14)


def test_epsilon_classic_median():
    A = make_problem(400, 20, seed=1).A
    eps = [
        measure_epsilon_classic(draw_embedding(EmbeddingSpec("gaussian", 80, seed), 400).to_dense(), A)
        for seed in range(100)
    ]
    assert np.median(eps) < 0.6


def test_epsilon_statdim_limits(rng):
    A = rng.standard_normal((20, 5))
    eps, fro2 = measure_epsilon_statdim(np.eye(20), A, 0.5)
    assert eps == pytest.approx(0.0, abs=1e-14)
    assert fro2 == pytest.approx(exact_sd(scipy.linalg.svdvals(A), 0.5), abs=1e-10)
    X = rng.standard_normal((4, 20))
    eps_big, _ = measure_epsilon_statdim(X, A, 1e14)
    assert eps_big < 1e-10


def test_epsilon_statdim_median():
    problem = make_problem(400, 40, seed=4, sigma_min=1e-12)
    A = problem.A
    lam = 1e-1  # sd ~ 2; for sd >~ 3 the 4 sd sketch puts the median above 0.7
    sd = exact_sd(scipy.linalg.svdvals(A), lam)
    s = 4 * math.ceil(sd)
    eps = [
        measure_epsilon_statdim(draw_embedding(EmbeddingSpec("gaussian", s, seed), 400).to_dense(), A, lam)[0]
        for seed in range(100)
    ]
    assert np.median(eps) < 0.7


@pytest.mark.parametrize("shape", [(25, 8), (8, 25)])
def test_lemma_identity(rng, shape):
    A = rng.standard_normal(shape) @ np.diag(np.logspace(0, -4, shape[1]))
    for lam in (1e-6, 1e-2, 3.0):
        u1 = lemma_u1(A, lam)
        assert np.sum(u1**2) == pytest.approx(exact_sd(scipy.linalg.svdvals(A), lam), abs=1e-10)


def test_size_guard():
    with pytest.raises(OracleTooLarge):
        direct_solve(np.zeros((2001, 2000)), np.zeros(2001), 1.0)
