"""Preconditioners built from a sketch ``Y`` of ``A``.

Two families, both satisfying ``R^T R = G + lam I`` where ``G`` is the sketched
Gram matrix (``Y^T Y`` for a left sketch, ``Y Y^T`` for a right sketch):

* :class:`CholeskyPreconditioner` - upper-triangular ``R``, one small Cholesky
  per ``lam`` on top of a shared Gram matrix.
* :class:`LowRankPreconditioner` - ``R^{-1} = lam^{-1/2} (I - W S W^T)`` from a
  thin SVD of ``Y``. Stored factored; applying it costs ``O(dim * rank)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._backend import kernels
from .core import ContractViolation, RidgeSketchError, as_dense, as_vector

EPS = np.finfo(np.float64).eps


class IllConditioned(RidgeSketchError, ArithmeticError):
    """Cholesky of ``C + lam I`` broke down: its condition number is near 1/u."""


class SingularPreconditioner(RidgeSketchError, ArithmeticError):
    pass


class InvalidTruncation(ContractViolation):
    pass


def _positive_lam(lam) -> float:
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0):
        raise ContractViolation(f"preconditioners need lam > 0, got {lam}")
    return lam


def build_gram(Y, side: str = "left") -> np.ndarray:
    """``Y^T Y`` (``side="left"``) or ``Y Y^T`` (``side="right"``), symmetrized."""
    Y = as_dense(Y, name="Y")
    if Y.size == 0:
        raise ContractViolation("Y is empty")
    if side == "left":
        C = Y.T @ Y
    elif side == "right":
        C = Y @ Y.T
    else:
        raise ContractViolation(f"side must be 'left' or 'right', got {side!r}")
    return np.asfortranarray(0.5 * (C + C.T))


@dataclass(frozen=True)
class CholeskyPreconditioner:
    R: np.ndarray
    lam: float

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    def apply_inverse(self, x, adjoint: bool = False) -> np.ndarray:
        """``R^{-1} x``, or ``R^{-T} x`` when ``adjoint``."""
        x = as_vector(x, self.dim, name="x")
        if np.any(np.diag(self.R) == 0):
            raise SingularPreconditioner("R has a zero on its diagonal")
        return scipy.linalg.solve_triangular(
            self.R, x, lower=False, trans="T" if adjoint else "N", check_finite=False
        )

    def dense_factor(self) -> np.ndarray:
        return self.R.copy()

    def dense_inverse(self) -> np.ndarray:
        return scipy.linalg.solve_triangular(self.R, np.eye(self.dim), lower=False)


def build_cholesky(C, lam: float) -> CholeskyPreconditioner:
    """Upper-triangular ``R`` with ``R^T R = C + lam I`` (no pivoting)."""
    lam = _positive_lam(lam)
    M = np.array(as_dense(C, name="C"), order="F", copy=True)
    if M.shape[0] != M.shape[1]:
        raise ContractViolation(f"C must be square, got {M.shape}")
    M[np.diag_indices_from(M)] += lam
    try:
        R = scipy.linalg.cholesky(M, lower=False, overwrite_a=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise IllConditioned(f"Cholesky of C + {lam:g} I broke down: {exc}") from exc
    d = np.diag(R)
    if not np.all(np.isfinite(R)) or np.any(d <= 0):
        raise IllConditioned(f"Cholesky of C + {lam:g} I produced a non-positive pivot")
    return CholeskyPreconditioner(np.asfortranarray(R), lam)


@dataclass(frozen=True)
class SvdSketch:
    """Singular values and the relevant singular-vector factor of a sketch.

    ``W`` holds the right singular vectors (``n x r``) of a left sketch ``XA``,
    or the left singular vectors (``m x r``) of a right sketch ``AX``.
    """

    sigma: np.ndarray
    W: np.ndarray

    @classmethod
    def from_sketch(cls, Y, side: str = "left") -> "SvdSketch":
        Y = as_dense(Y, name="Y")
        U, sigma, Vt = scipy.linalg.svd(Y, full_matrices=False, check_finite=False)
        if side == "left":
            W = Vt.T
        elif side == "right":
            W = U
        else:
            raise ContractViolation(f"side must be 'left' or 'right', got {side!r}")
        return cls(sigma, np.asfortranarray(W))

    @property
    def rank(self) -> int:
        return self.sigma.shape[0]


@dataclass(frozen=True)
class LowRankPreconditioner:
    """``R^{-1} = lam^{-1/2} (I - W S W^T)``; symmetric, so ``R^{-T} = R^{-1}``."""

    W: np.ndarray
    S: np.ndarray
    lam: float
    rank: int
    sigma: np.ndarray

    def __post_init__(self):
        # the compiled kernel reads W column-major and S contiguous
        object.__setattr__(self, "W", np.asfortranarray(self.W, dtype=np.float64))
        object.__setattr__(self, "S", np.ascontiguousarray(self.S, dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    def apply_inverse(self, x, adjoint: bool = False, counter: "FlopCounter | None" = None):
        x = as_vector(x, self.dim, name="x")
        if counter is not None:
            d, k = self.W.shape
            counter.flops += 4 * d * k + k + 2 * d
            counter.calls += 1
        return kernels.lowrank_apply(self.W, self.S, self.lam**-0.5, x)

    def dense_inverse(self) -> np.ndarray:
        W = self.W
        return self.lam**-0.5 * (np.eye(self.dim) - (W * self.S) @ W.T)

    def dense_factor(self) -> np.ndarray:
        """``R = sqrt(lam) (W F W^T + I)``, ``F = sqrt(1 + sigma^2/lam) - 1``."""
        F = np.sqrt(1.0 + self.sigma**2 / self.lam) - 1.0
        F[self.S == 0] = 0.0
        W = self.W
        return np.sqrt(self.lam) * ((W * F) @ W.T + np.eye(self.dim))


@dataclass
class FlopCounter:
    flops: int = 0
    calls: int = 0


def shrinkage(sigma, lam: float, sigma_max: float | None = None) -> np.ndarray:
    """``1 - (1 + sigma^2/lam)^{-1/2}``, zero for ``sigma < u * sigma_max``."""
    sigma = np.asarray(sigma, dtype=np.float64)
    t = sigma**2 / lam
    r = np.sqrt(1.0 + t)
    S = t / (r * (r + 1.0))
    top = sigma_max if sigma_max is not None else (sigma.max() if sigma.size else 0.0)
    S[sigma < EPS * top] = 0.0
    return S


def lowrank_from_svd(svd: SvdSketch, lam: float, rank: int) -> LowRankPreconditioner:
    """Truncate ``svd`` to its leading ``rank`` triplets and form the shrinkage."""
    lam = _positive_lam(lam)
    rank = int(rank)
    if not 1 <= rank <= svd.rank:
        raise InvalidTruncation(f"truncation rank {rank} outside [1, {svd.rank}]")
    sigma = svd.sigma[:rank]
    sigma_max = svd.sigma[0] if svd.rank else 0.0
    S = shrinkage(sigma, lam, sigma_max)
    if np.any(S >= 1.0):
        raise IllConditioned(f"sigma^2/lam too large at lam={lam:g}; shrinkage rounds to 1")
    return LowRankPreconditioner(svd.W[:, :rank], S, lam, rank, sigma.copy())


def apply_inverse(p, x, adjoint: bool = False) -> np.ndarray:
    """Apply ``R^{-1}`` (or ``R^{-T}``) of either preconditioner family."""
    return p.apply_inverse(x, adjoint)


def _check_sigma(sigma, lam) -> tuple[np.ndarray, float]:
    sigma = np.asarray(sigma, dtype=np.float64).ravel()
    if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
        raise ContractViolation("singular values must be finite and nonnegative")
    lam = float(lam)
    if not lam >= 0:
        raise ContractViolation(f"lam must be >= 0, got {lam}")
    return sigma, lam


def _statdim(sigma, lam) -> float:
    sigma, lam = _check_sigma(sigma, lam)
    s2 = sigma**2
    if lam == 0:
        return float(np.count_nonzero(s2))
    return float(np.sum(s2 / (s2 + lam)))


def estimate_sd(sigma, lam: float) -> float:
    """Statistical dimension estimate from the singular values of a sketch."""
    return _statdim(sigma, lam)


def exact_sd(sigma_A, lam: float) -> float:
    """``sum_i 1 / (1 + lam / sigma_i^2)`` over the singular values of ``A``."""
    return _statdim(sigma_A, lam)
