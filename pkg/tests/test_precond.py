import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from ridge_sketch.core import ContractViolation
from ridge_sketch.oracle import cond_preconditioned, measure_epsilon_classic, measure_epsilon_statdim
from ridge_sketch.precond import (
    CholeskyPreconditioner,
    FlopCounter,
    IllConditioned,
    InvalidTruncation,
    SingularPreconditioner,
    SvdSketch,
    apply_inverse,
    build_cholesky,
    build_gram,
    estimate_sd,
    exact_sd,
    lowrank_from_svd,
    shrinkage,
)
from ridge_sketch.sketch import EmbeddingSpec, draw_embedding

from conftest import make_problem


def _triple_loop(Y):
    s, n = Y.shape
    C = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(s):
                acc += Y[k, i] * Y[k, j]
            C[i, j] = acc
    return C


def test_gram_identity():
    np.testing.assert_array_equal(build_gram(np.eye(3)), np.eye(3))


def test_gram_rank_one():
    np.testing.assert_array_equal(build_gram(np.array([[1.0, 2.0], [0.0, 0.0]])), [[1, 2], [2, 4]])


def test_gram_matches_triple_loop(rng):
    Y = rng.standard_normal((7, 4))
    C = build_gram(Y)
    np.testing.assert_allclose(C, _triple_loop(Y), rtol=0, atol=1e-13 * np.abs(C).max())
    assert np.array_equal(C, C.T)
    np.testing.assert_allclose(build_gram(Y.T, "right"), _triple_loop(Y), atol=1e-13 * np.abs(C).max())


def test_gram_rejects_bad_side():
    with pytest.raises(ContractViolation):
        build_gram(np.eye(2), "middle")


def test_cholesky_of_zero():
    p = build_cholesky(np.zeros((3, 3)), 9.0)
    np.testing.assert_allclose(p.R, 3 * np.eye(3), rtol=1e-15)


def test_cholesky_scalar():
    np.testing.assert_allclose(build_cholesky(np.array([[3.0]]), 1.0).R, [[2.0]])


def test_cholesky_residual(rng):
    G = rng.standard_normal((10, 10))
    C = G @ G.T
    R = build_cholesky(C, 0.1).R
    target = C + 0.1 * np.eye(10)
    assert np.linalg.norm(R.T @ R - target) / np.linalg.norm(target) <= 1e-13
    assert np.allclose(R, np.triu(R))
    assert np.all(np.diag(R) > 0)


@pytest.mark.parametrize("lam", [0.0, -1.0, np.nan])
def test_cholesky_rejects_nonpositive_lambda(lam):
    with pytest.raises(ContractViolation):
        build_cholesky(np.eye(2), lam)


def test_cholesky_breakdown_is_ill_conditioned():
    C = np.ones((2, 2))  # rank one; 1e-20 is invisible next to it
    with pytest.raises(IllConditioned):
        build_cholesky(C, 1e-20)


def test_lowrank_zero_sigma_is_scaled_identity(rng):
    svd = SvdSketch(np.zeros(3), np.linalg.qr(rng.standard_normal((5, 3)))[0])
    p = lowrank_from_svd(svd, 4.0, 3)
    np.testing.assert_array_equal(p.S, 0.0)
    x = rng.standard_normal(5)
    np.testing.assert_allclose(p.apply_inverse(x), x / 2, rtol=1e-15)


def test_lowrank_shrinkage_half():
    lam = 0.7
    assert shrinkage(np.array([math.sqrt(3 * lam)]), lam)[0] == pytest.approx(0.5, abs=1e-15)


def test_shrinkage_against_formula(rng):
    sigma = np.sort(rng.uniform(0, 10, 20))[::-1]
    S = shrinkage(sigma, 0.3)
    np.testing.assert_allclose(S, 1 - np.sqrt(1 / (1 + sigma**2 / 0.3)), rtol=1e-13)
    assert np.all(np.diff(S) <= 0)
    assert np.all((S >= 0) & (S < 1))


def _lowrank(rng, s=12, n=6, lam=0.5, rank=None):
    Y = rng.standard_normal((s, n))
    svd = SvdSketch.from_sketch(Y)
    return Y, svd, lowrank_from_svd(svd, lam, rank or svd.rank)


def test_lowrank_dense_reconstruction(rng):
    Y, svd, p = _lowrank(rng)
    R = p.dense_factor()
    target = Y.T @ Y + 0.5 * np.eye(6)
    assert np.linalg.norm(R.T @ R - target) / np.linalg.norm(target) <= 1e-11
    np.testing.assert_allclose(R @ p.dense_inverse(), np.eye(6), atol=1e-12)


def test_svd_sketch_invariants(rng):
    svd = SvdSketch.from_sketch(rng.standard_normal((15, 8)))
    assert np.all(np.diff(svd.sigma) <= 0) and np.all(svd.sigma >= 0)
    assert np.linalg.norm(svd.W.T @ svd.W - np.eye(svd.rank)) <= 1e-10
    right = SvdSketch.from_sketch(rng.standard_normal((8, 15)), "right")
    assert right.W.shape == (8, 8)


@pytest.mark.parametrize("rank", [0, 7])
def test_lowrank_rank_out_of_range(rng, rank):
    _, svd, _ = _lowrank(rng)
    with pytest.raises(InvalidTruncation):
        lowrank_from_svd(svd, 0.5, rank)


def test_lowrank_rejects_zero_lambda(rng):
    _, svd, _ = _lowrank(rng)
    with pytest.raises(ContractViolation):
        lowrank_from_svd(svd, 0.0, 2)


def test_apply_inverse_examples(rng):
    p = CholeskyPreconditioner(2 * np.eye(2), 4.0)
    np.testing.assert_allclose(apply_inverse(p, np.array([4.0, 4.0])), [2, 2])
    svd = SvdSketch(np.zeros(2), np.eye(4)[:, :2])
    q = lowrank_from_svd(svd, 4.0, 2)
    x = rng.standard_normal(4)
    np.testing.assert_allclose(apply_inverse(q, x), x / 2)


def test_apply_inverse_matches_dense(rng):
    _, _, p = _lowrank(rng, s=20, n=9, lam=0.2, rank=5)
    W, S = p.W, p.S
    dense = 0.2**-0.5 * (np.eye(9) - W @ np.diag(S) @ W.T)
    x = rng.standard_normal(9)
    np.testing.assert_allclose(apply_inverse(p, x), dense @ x, atol=1e-12)
    np.testing.assert_allclose(apply_inverse(p, x, adjoint=True), dense @ x, atol=1e-12)


def test_cholesky_apply_inverse_adjoint(rng):
    G = rng.standard_normal((6, 6))
    p = build_cholesky(G.T @ G, 0.3)
    x = rng.standard_normal(6)
    np.testing.assert_allclose(p.R @ p.apply_inverse(x), x, atol=1e-12)
    np.testing.assert_allclose(p.R.T @ p.apply_inverse(x, adjoint=True), x, atol=1e-12)


def test_singular_cholesky_factor():
    p = CholeskyPreconditioner(np.diag([1.0, 0.0]), 1.0)
    with pytest.raises(SingularPreconditioner):
        p.apply_inverse(np.ones(2))


def test_lowrank_self_adjoint(rng):
    _, _, p = _lowrank(rng, s=30, n=15, lam=0.05, rank=10)
    for _ in range(20):
        x, y = rng.standard_normal(15), rng.standard_normal(15)
        assert abs(p.apply_inverse(x) @ y - x @ p.apply_inverse(y)) <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(y) * 0.05**-0.5


def test_truncation_nesting_bitwise(rng):
    _, svd, _ = _lowrank(rng, s=25, n=10)
    small = lowrank_from_svd(svd, 0.01, 4)
    big = lowrank_from_svd(svd, 0.01, 9)
    assert np.array_equal(small.W, big.W[:, :4])
    assert np.array_equal(small.S, big.S[:4])


def test_flop_counter_bound(rng):
    _, _, p = _lowrank(rng, s=40, n=30, lam=0.1, rank=12)
    c = FlopCounter()
    p.apply_inverse(rng.standard_normal(30), counter=c)
    d, k = 30, 12
    assert c.calls == 1
    assert c.flops <= 3 * (2 * d * k + k * k + d)


def test_estimate_sd_examples():
    assert estimate_sd([1.0], 1.0) == 0.5
    assert estimate_sd([3.0, 2.0, 1e-3], 0.0) == 3
    assert estimate_sd([3.0, 2.0, 1e-3], 1e-30) == pytest.approx(3, abs=1e-20)
    # exact rational summation as the independent reference
    ref = Fraction(100, 101) + Fraction(1, 2) + Fraction(1, 101)
    assert ref == Fraction(3, 2)
    assert estimate_sd([10.0, 1.0, 0.1], 1.0) == pytest.approx(float(ref), abs=1e-14)


def test_exact_sd_examples():
    assert exact_sd(np.ones(7), 1.0) == pytest.approx(3.5, abs=1e-15)
    assert exact_sd(np.ones(7), 0.0) == 7
    sigma = np.logspace(0, -8, 50)
    ref = math.fsum(1.0 / (1.0 + 1e-4 / float(s) ** 2) for s in sigma)
    got = exact_sd(sigma, 1e-4)
    assert got == pytest.approx(ref, rel=1e-13)
    assert got <= 50


def test_sd_rejects_negative_sigma():
    with pytest.raises(ContractViolation):
        estimate_sd([1.0, -1.0], 1.0)
    with pytest.raises(ContractViolation):
        exact_sd([1.0], -1.0)


@settings(max_examples=60, deadline=None)
@given(
    sigma=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=20),
    lam=st.floats(1e-6, 1e3),
    factor=st.floats(1.01, 100.0),
)
def test_sd_strictly_decreasing(sigma, lam, factor):
    a, b = exact_sd(sigma, lam), exact_sd(sigma, lam * factor)
    assert b < a
    assert 0 <= b <= len(sigma)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("lam", [1e-4, 1e-1, 10.0])
def test_cholesky_condition_bound(seed, lam):
    A = make_problem(400, 20, seed=seed).A
    X = draw_embedding(EmbeddingSpec("gaussian", 80, seed), 400).to_dense()
    p = build_cholesky(build_gram(X @ A), lam)
    eps = measure_epsilon_classic(X, A)
    assert eps < 1
    assert cond_preconditioned(A, lam, p) <= (1 + eps) / (1 - eps) * (1 + 1e-8)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("lam", [1e-4, 1e-1, 10.0])
def test_lowrank_condition_bound(seed, lam):
    A = make_problem(400, 20, seed=seed, sigma_min=1e-12).A
    sd = exact_sd(scipy.linalg.svdvals(A), lam)
    s = min(4 * math.ceil(sd), 20)
    X = draw_embedding(EmbeddingSpec("gaussian", s, seed), 400).to_dense()
    svd = SvdSketch.from_sketch(X @ A)
    p = lowrank_from_svd(svd, lam, svd.rank)
    eps, _ = measure_epsilon_statdim(X, A, lam)
    if eps < 1:
        assert cond_preconditioned(A, lam, p) <= math.sqrt((1 + eps) / (1 - eps)) * (1 + 1e-8)
