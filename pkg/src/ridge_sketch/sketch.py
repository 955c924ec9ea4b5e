"""Random embeddings: Gaussian, subsampled randomized DCT (SRTT) and count-sketch.

Every embedding is a pure function of ``(kind, s, seed, ambient_dim)``. Random
numbers come from numpy's ``Generator(PCG64(seed))``, whose stream is fixed
across platforms for a given numpy major version.

``X`` is ``s x m`` for a left sketch ``X @ A``. A right sketch ``A @ X'`` uses
``X' = X.T`` drawn over the column dimension, so ``A X' = (X A^T)^T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from ._backend import kernels
from .core import ContractViolation, as_dense

KINDS = ("gaussian", "srtt", "sparse")


class InvalidSpec(ContractViolation):
    pass


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: str
    s: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown embedding kind {self.kind!r}; expected one of {KINDS}")
        if int(self.s) < 1:
            raise InvalidSpec(f"sketch dimension must be >= 1, got {self.s}")
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "seed", int(self.seed))

    def to_json(self) -> dict:
        return {"kind": self.kind, "s": self.s, "seed": self.seed}

    @classmethod
    def from_json(cls, d: dict) -> "EmbeddingSpec":
        return cls(d["kind"], d["s"], d.get("seed", 0))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _signs(rng, m):
    return rng.integers(0, 2, size=m).astype(np.float64) * 2.0 - 1.0


@dataclass(frozen=True)
class GaussianEmbedding:
    X: np.ndarray

    @property
    def shape(self):
        return self.X.shape

    def apply(self, M):
        return np.asfortranarray(self.X @ M)

    def to_dense(self):
        return self.X.copy()


@dataclass(frozen=True)
class SrttPlan:
    """``X = sqrt(m/s) * S F D`` with ``F`` the orthonormal DCT-II."""

    indices: np.ndarray
    signs: np.ndarray
    scale: float

    def __post_init__(self):
        m = self.signs.shape[0]
        idx = np.asarray(self.indices)
        if idx.size == 0 or len(np.unique(idx)) != idx.size:
            raise InvalidSpec("sampled indices must be nonempty and distinct")
        if idx.min() < 0 or idx.max() >= m:
            raise InvalidSpec("sampled indices out of range")
        if not np.all(np.abs(self.signs) == 1.0):
            raise InvalidSpec("signs must be +-1")
        if not self.scale > 0:
            raise InvalidSpec("scale must be positive")

    @classmethod
    def identity(cls, m: int) -> "SrttPlan":
        """All rows, all signs +1: ``X = F``."""
        return cls(np.arange(m), np.ones(m), 1.0)

    @property
    def shape(self):
        return (self.indices.shape[0], self.signs.shape[0])

    def apply(self, M):
        return srtt_apply(self, M)

    def to_dense(self):
        m = self.signs.shape[0]
        F = scipy.fft.dct(np.eye(m), type=2, norm="ortho", axis=0)
        return self.scale * F[self.indices, :] * self.signs[None, :]


@dataclass(frozen=True)
class CountSketch:
    """One ``+-1`` per column of ``X``, in row ``rows[j]``."""

    rows: np.ndarray
    signs: np.ndarray
    s: int

    @property
    def shape(self):
        return (self.s, self.rows.shape[0])

    def apply(self, M):
        M = np.asfortranarray(M, dtype=np.float64)
        return kernels.countsketch_rows(M, self.rows, self.signs, self.s)

    def to_dense(self):
        m = self.rows.shape[0]
        X = np.zeros((self.s, m))
        X[self.rows, np.arange(m)] = self.signs
        return X


def gaussian_embedding(s: int, m: int, seed: int) -> GaussianEmbedding:
    """i.i.d. ``N(0, 1/s)`` entries, so ``E[X^T X] = I``. No ``s <= m`` check."""
    return GaussianEmbedding(_rng(seed).standard_normal((s, m)) / np.sqrt(s))


def draw_embedding(spec: EmbeddingSpec, m: int):
    """Build the ``s x m`` embedding described by ``spec``."""
    if spec.s > m:
        raise InvalidSpec(f"sketch dimension {spec.s} exceeds ambient dimension {m}")
    s = spec.s
    if spec.kind == "gaussian":
        return gaussian_embedding(s, m, spec.seed)
    rng = _rng(spec.seed)
    if spec.kind == "srtt":
        signs = _signs(rng, m)
        indices = np.sort(rng.choice(m, size=s, replace=False))
        return SrttPlan(indices, signs, float(np.sqrt(m / s)))
    rows = rng.integers(0, s, size=m).astype(np.int64)
    signs = _signs(rng, m)
    return CountSketch(rows, signs, s)


def srtt_apply(plan: SrttPlan, M) -> np.ndarray:
    """``sqrt(m/s) * (DCT(D M))[indices]``; ``M`` may be a vector or a matrix."""
    M = np.asarray(M, dtype=np.float64)
    m = plan.signs.shape[0]
    if M.shape[0] != m:
        raise ContractViolation(f"plan built for dimension {m}, got {M.shape[0]} rows")
    DM = M * plan.signs.reshape((m,) + (1,) * (M.ndim - 1))
    FDM = scipy.fft.dct(DM, type=2, norm="ortho", axis=0)
    return np.asfortranarray(plan.scale * FDM[plan.indices])


def sketch_left(spec: EmbeddingSpec, A) -> np.ndarray:
    """``Y = X A`` with ``X`` of size ``s x m``."""
    A = as_dense(A)
    return draw_embedding(spec, A.shape[0]).apply(A)


def sketch_right(spec: EmbeddingSpec, A) -> np.ndarray:
    """``Y = A X`` with ``X`` of size ``n x s``."""
    A = as_dense(A)
    if spec.s > A.shape[1]:
        raise InvalidSpec(f"sketch dimension {spec.s} exceeds ambient dimension {A.shape[1]}")
    return np.asfortranarray(draw_embedding(spec, A.shape[1]).apply(A.T).T)
