"""Dense reference computations for verification. Not a production path.

Everything here assembles matrices explicitly, so inputs are capped at
``MAX_ENTRIES`` (2000^2 float64 values) of workspace per matrix.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .core import ContractViolation, Orientation, as_dense, as_vector, assemble_augmented
from .precond import exact_sd

MAX_ENTRIES = 2000 * 2000


class OracleTooLarge(ContractViolation):
    pass


def _guard(A) -> np.ndarray:
    A = as_dense(A)
    if A.size > MAX_ENTRIES:
        raise OracleTooLarge(f"oracle is capped at {MAX_ENTRIES} entries, got {A.shape}")
    return A


def _svd(A):
    return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")


def singular_values(A) -> np.ndarray:
    return scipy.linalg.svdvals(_guard(A))


def direct_solve(A, b, lam: float) -> np.ndarray:
    """``x = V diag(sigma / (sigma^2 + lam)) U^T b``: the min-norm ridge minimizer."""
    A = _guard(A)
    b = as_vector(b, A.shape[0], name="b")
    lam = float(lam)
    if lam < 0:
        raise ContractViolation(f"lam must be >= 0, got {lam}")
    U, sigma, Vt = _svd(A)
    if lam == 0:
        cut = max(A.shape) * np.finfo(float).eps * (sigma[0] if sigma.size else 0.0)
        keep = sigma > cut
        coef = np.zeros_like(sigma)
        coef[keep] = 1.0 / sigma[keep]
    else:
        coef = sigma / (sigma**2 + lam)
    return Vt.T @ (coef * (U.T @ b))


def _orientation(A, orientation):
    if orientation is None:
        return Orientation.OVER if A.shape[0] >= A.shape[1] else Orientation.UNDER
    return Orientation(orientation)


def preconditioned_matrix(A, lam: float, p, orientation=None) -> np.ndarray:
    """Dense ``B R^{-1}`` (over) or ``R^{-T} D`` (under)."""
    A = _guard(A)
    orientation = _orientation(A, orientation)
    Rinv = p.dense_inverse()
    if orientation is Orientation.OVER:
        return assemble_augmented(A, lam, "B") @ Rinv
    return Rinv.T @ assemble_augmented(A, lam, "D")


def cond_preconditioned(A, lam: float, p, orientation=None) -> float:
    """Two-norm condition number of the preconditioned augmented matrix."""
    try:
        M = preconditioned_matrix(A, lam, p, orientation)
    except (np.linalg.LinAlgError, ArithmeticError):
        return float("inf")
    if not np.all(np.isfinite(M)):
        return float("inf")
    sv = scipy.linalg.svdvals(M)
    if sv[-1] == 0:
        return float("inf")
    return float(sv[0] / sv[-1])


def cond(M) -> float:
    sv = scipy.linalg.svdvals(as_dense(M))
    return float("inf") if sv[-1] == 0 else float(sv[0] / sv[-1])


def _basis(A, orientation):
    """Column basis the embedding acts on: ``U_A`` (over) or ``V_A`` (under)."""
    U, sigma, Vt = _svd(A)
    if orientation is Orientation.OVER:
        return U, sigma
    return Vt.T, sigma


def _sketched_basis(X, Q, orientation):
    X = np.asarray(X, dtype=np.float64)
    if orientation is Orientation.OVER:
        if X.shape[1] != Q.shape[0]:
            raise ContractViolation(f"left embedding must have {Q.shape[0]} columns, got {X.shape}")
        return X @ Q
    if X.shape[0] != Q.shape[0]:
        raise ContractViolation(f"right embedding must have {Q.shape[0]} rows, got {X.shape}")
    return X.T @ Q


def measure_epsilon_classic(X, A, orientation=None) -> float:
    """``max(|sigma_max(XU) - 1|, |1 - sigma_min(XU)|)`` for the singular basis ``U``.

    ``X`` is ``s x m`` for tall ``A`` (acting on ``U_A``) and ``n x s`` for wide
    ``A`` (``X^T`` acting on ``V_A``).
    """
    A = _guard(A)
    orientation = _orientation(A, orientation)
    Q, _ = _basis(A, orientation)
    XQ = _sketched_basis(X, Q, orientation)
    sv = scipy.linalg.svdvals(XQ)
    smin = sv[-1] if XQ.shape[0] >= XQ.shape[1] else 0.0
    return float(max(abs(sv[0] - 1.0), abs(1.0 - smin)))


def lemma_u1(A, lam: float, orientation=None) -> np.ndarray:
    """First block of the singular vectors of the augmented matrix.

    Over: the first ``m`` rows of the left singular vectors of ``B``.
    Under: the first ``n`` rows of the right singular vectors of ``D``.
    """
    A = _guard(A)
    orientation = _orientation(A, orientation)
    m, n = A.shape
    if orientation is Orientation.OVER:
        U, _, _ = _svd(assemble_augmented(A, lam, "B"))
        return U[:m]
    _, _, Vt = _svd(assemble_augmented(A, lam, "D"))
    return Vt.T[:n]


def measure_epsilon_statdim(X, A, lam: float, orientation=None) -> tuple[float, float]:
    """Return ``(eps, ||U_1||_F^2)``.

    ``eps = ||S U^T X^T X U S - S^2||_2`` with ``S = Sigma (Sigma^2 + lam)^{-1/2}``.
    ``||U_1||_F^2`` is measured from the SVD of the augmented matrix and checked
    against the statistical dimension.
    """
    A = _guard(A)
    orientation = _orientation(A, orientation)
    lam = float(lam)
    Q, sigma = _basis(A, orientation)
    S_lam = sigma / np.sqrt(sigma**2 + lam)
    XQ = _sketched_basis(X, Q, orientation) * S_lam
    M = XQ.T @ XQ - np.diag(S_lam**2)
    eps = float(np.linalg.norm(M, 2))

    u1 = lemma_u1(A, lam, orientation)
    fro2 = float(np.sum(u1**2))
    sd = exact_sd(sigma, lam)
    if abs(fro2 - sd) > 1e-10 * max(1.0, sd):
        raise AssertionError(f"||U_1||_F^2 = {fro2!r} differs from sd = {sd!r}")
    return eps, fro2
