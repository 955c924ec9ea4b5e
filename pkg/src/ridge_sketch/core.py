"""Dense primitives and matrix-free augmented operators.

For the ridge problem ``min ||A x - b||^2 + lam ||x||^2`` two equivalent plain
least-squares forms are used::

    over:   B = [A; sqrt(lam) I_n],   rhs [b; 0]     (tall A)
    under:  D = [A, sqrt(lam) I_m],   min-norm solve (wide A)

Neither is ever assembled outside the test/oracle path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np


class RidgeSketchError(Exception):
    """Base class for errors raised by this package."""


class ContractViolation(RidgeSketchError, ValueError):
    """Raised when dimensions or arguments break an operation's contract."""


class Orientation(str, Enum):
    OVER = "overdetermined"
    UNDER = "underdetermined"


def as_dense(A: Any, *, name: str = "A") -> np.ndarray:
    """Return ``A`` as a finite, column-major float64 2-D array."""
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise ContractViolation(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ContractViolation(f"{name} has non-finite entries")
    return np.asfortranarray(M)


def as_vector(v: Any, size: int | None = None, *, name: str = "v") -> np.ndarray:
    x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1:
        raise ContractViolation(f"{name} must be 1-D, got shape {x.shape}")
    if size is not None and x.shape[0] != size:
        raise ContractViolation(f"{name} has length {x.shape[0]}, expected {size}")
    return x


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise ContractViolation(f"regularization must be finite and >= 0, got {lam}")
    return lam


@dataclass(frozen=True)
class ProblemInstance:
    """A ridge problem: matrix, right-hand side, orientation and provenance."""

    A: np.ndarray
    b: np.ndarray
    orientation: Orientation
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = as_dense(self.A)
        b = as_vector(self.b, A.shape[0], name="b")
        orientation = Orientation(self.orientation)
        m, n = A.shape
        if orientation is Orientation.OVER and m < n:
            raise ContractViolation(f"overdetermined problem needs rows >= cols, got {m}x{n}")
        if orientation is Orientation.UNDER and n < m:
            raise ContractViolation(f"underdetermined problem needs cols >= rows, got {m}x{n}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "orientation", orientation)

    @classmethod
    def from_arrays(cls, A, b, meta=None) -> "ProblemInstance":
        A = as_dense(A)
        orientation = Orientation.OVER if A.shape[0] >= A.shape[1] else Orientation.UNDER
        return cls(A, b, orientation, dict(meta or {}))

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


class LinearOperator:
    """Minimal matrix-free operator: ``shape``, ``matvec`` and ``rmatvec``.

    Subclasses implement ``_matvec`` and ``_rmatvec``; the public methods check
    dimensions. ``shape`` is ``(out_dim, in_dim)``.
    """

    shape: tuple[int, int]

    def matvec(self, v):
        v = as_vector(v, self.shape[1])
        return self._matvec(v)

    def rmatvec(self, u):
        u = as_vector(u, self.shape[0], name="u")
        return self._rmatvec(u)

    def _matvec(self, v):  # pragma: no cover - abstract
        raise NotImplementedError

    def _rmatvec(self, u):  # pragma: no cover - abstract
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        """Assemble column by column. Test/oracle use only."""
        out, inp = self.shape
        M = np.empty((out, inp), order="F")
        e = np.zeros(inp)
        for j in range(inp):
            e[j] = 1.0
            M[:, j] = self._matvec(e)
            e[j] = 0.0
        return M


class MatrixOperator(LinearOperator):
    """Wrap an explicit dense matrix."""

    def __init__(self, M):
        self.M = as_dense(M, name="M")
        self.shape = self.M.shape

    def _matvec(self, v):
        return self.M @ v

    def _rmatvec(self, u):
        return self.M.T @ u


class AugmentedOperator(LinearOperator):
    """``B = [A; sqrt(lam) I]`` (form ``"B"``) or ``D = [A, sqrt(lam) I]`` (form ``"D"``)."""

    def __init__(self, A, lam: float, form: str):
        if form not in ("B", "D"):
            raise ContractViolation(f"form must be 'B' or 'D', got {form!r}")
        self.A = as_dense(A)
        self.lam = _check_lam(lam)
        self.form = form
        self.root = np.sqrt(self.lam)
        m, n = self.A.shape
        self.shape = (m + n, n) if form == "B" else (m, n + m)

    def _matvec(self, v):
        m, n = self.A.shape
        if self.form == "B":
            return np.concatenate([self.A @ v, self.root * v])
        return self.A @ v[:n] + self.root * v[n:]

    def _rmatvec(self, u):
        m, n = self.A.shape
        if self.form == "B":
            return self.A.T @ u[:m] + self.root * u[m:]
        return np.concatenate([self.A.T @ u, self.root * u])


def augmented_apply_over(A, lam: float, v, adjoint: bool = False) -> np.ndarray:
    """Apply ``B = [A; sqrt(lam) I_n]`` or its transpose to ``v``."""
    op = AugmentedOperator(A, lam, "B")
    return op.rmatvec(v) if adjoint else op.matvec(v)


def augmented_apply_under(A, lam: float, v, adjoint: bool = False) -> np.ndarray:
    """Apply ``D = [A, sqrt(lam) I_m]`` or its transpose to ``v``."""
    op = AugmentedOperator(A, lam, "D")
    return op.rmatvec(v) if adjoint else op.matvec(v)


def assemble_augmented(A, lam: float, form: str) -> np.ndarray:
    """Dense ``B`` or ``D``; oracle/test path only."""
    A = as_dense(A)
    lam = _check_lam(lam)
    m, n = A.shape
    if form == "B":
        return np.vstack([A, np.sqrt(lam) * np.eye(n)])
    if form == "D":
        return np.hstack([A, np.sqrt(lam) * np.eye(m)])
    raise ContractViolation(f"form must be 'B' or 'D', got {form!r}")
