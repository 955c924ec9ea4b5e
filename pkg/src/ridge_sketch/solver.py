"""Matrix-free LSQR (Paige & Saunders, 1982) and preconditioned operator wrappers."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ContractViolation, LinearOperator, as_vector


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class LsqrConfig:
    rel_tolerance: float = 1e-6
    max_iterations: int | None = None
    record_history: bool = True

    def __post_init__(self):
        if not 0 < self.rel_tolerance < 1:
            raise ContractViolation(f"rel_tolerance must lie in (0, 1), got {self.rel_tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ContractViolation(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass
class SolveReport:
    iterations: int
    termination: Termination
    wall_time: float
    residual_norm: float
    residual_history: list[float] | None = None
    anorm: float = 0.0
    arnorm: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "termination": self.termination.value,
            "wall_time": self.wall_time,
            "residual_norm": self.residual_norm,
            "residual_history": self.residual_history,
        }


class RightPreconditioned(LinearOperator):
    """``v -> op (R^{-1} v)``; recover ``x = R^{-1} y`` afterwards."""

    def __init__(self, op: LinearOperator, precond):
        self.op = op
        self.precond = precond
        self.shape = op.shape

    def _matvec(self, v):
        return self.op.matvec(self.precond.apply_inverse(v))

    def _rmatvec(self, u):
        return self.precond.apply_inverse(self.op.rmatvec(u), adjoint=True)


class LeftPreconditioned(LinearOperator):
    """``u -> R^{-T} (op u)``; the right-hand side must be mapped by ``R^{-T}`` too."""

    def __init__(self, op: LinearOperator, precond):
        self.op = op
        self.precond = precond
        self.shape = op.shape

    def _matvec(self, v):
        return self.precond.apply_inverse(self.op.matvec(v), adjoint=True)

    def _rmatvec(self, u):
        return self.op.rmatvec(self.precond.apply_inverse(u))


def lsqr(op: LinearOperator, rhs, cfg: LsqrConfig | None = None):
    """Minimize ``||op y - rhs||`` from ``y = 0``.

    The stopping rule is Paige-Saunders' pair of tests with ``atol = btol =
    cfg.rel_tolerance``::

        ||r|| <= btol ||b|| + atol ||A|| ||y||        (compatible systems)
        ||A^T r|| <= atol ||A|| ||r||                  (least squares)

    where ``||A||`` is the running Frobenius estimate from the bidiagonalization.

    Returns ``(y, SolveReport)``. Non-finite values end the run with
    ``Termination.BREAKDOWN`` and the last finite iterate.
    """
    cfg = cfg or LsqrConfig()
    out_dim, in_dim = op.shape
    b = as_vector(rhs, out_dim, name="rhs")
    tol = cfg.rel_tolerance
    max_it = cfg.max_iterations or 4 * min(out_dim, in_dim)
    t0 = time.perf_counter()

    x = np.zeros(in_dim)
    u = b.copy()
    beta = float(np.linalg.norm(u))
    alfa = 0.0
    v = np.zeros(in_dim)
    if beta > 0:
        u /= beta
        v = op.rmatvec(u)
        alfa = float(np.linalg.norm(v))
    if alfa > 0:
        v = v / alfa
    w = v.copy()

    history = [beta] if cfg.record_history else None
    bnorm = beta
    rnorm = beta
    anorm = 0.0
    arnorm = alfa * beta

    def report(itn, how):
        return SolveReport(
            iterations=itn,
            termination=how,
            wall_time=time.perf_counter() - t0,
            residual_norm=rnorm,
            residual_history=history,
            anorm=anorm,
            arnorm=arnorm,
        )

    if arnorm == 0 or not math.isfinite(arnorm):
        how = Termination.CONVERGED if math.isfinite(arnorm) else Termination.BREAKDOWN
        return x, report(0, how)

    rhobar = alfa
    phibar = beta
    itn = 0
    while itn < max_it:
        itn += 1
        u = op.matvec(v) - alfa * u
        beta = float(np.linalg.norm(u))
        if beta > 0:
            u /= beta
            anorm = math.sqrt(anorm**2 + alfa**2 + beta**2)
            v = op.rmatvec(u) - beta * v
            alfa = float(np.linalg.norm(v))
            if alfa > 0:
                v /= alfa
        else:
            anorm = math.sqrt(anorm**2 + alfa**2)

        rho = math.hypot(rhobar, beta)
        if not math.isfinite(rho) or not math.isfinite(alfa):
            return x, report(itn - 1, Termination.BREAKDOWN)
        if rho == 0:
            return x, report(itn - 1, Termination.BREAKDOWN)
        cs = rhobar / rho
        sn = beta / rho
        theta = sn * alfa
        rhobar = -cs * alfa
        phi = cs * phibar
        phibar = sn * phibar

        x_new = x + (phi / rho) * w
        if not np.all(np.isfinite(x_new)):
            return x, report(itn - 1, Termination.BREAKDOWN)
        x = x_new
        w = v - (theta / rho) * w

        rnorm = abs(phibar)
        arnorm = alfa * abs(sn * phi)
        if history is not None:
            history.append(rnorm)

        xnorm = float(np.linalg.norm(x))
        test1 = rnorm / bnorm
        test2 = arnorm / (anorm * rnorm) if rnorm > 0 else 0.0
        rtol = tol + tol * anorm * xnorm / bnorm
        if test1 <= rtol or test2 <= tol or 1 + test1 <= 1 or 1 + test2 <= 1:
            return x, report(itn, Termination.CONVERGED)

    return x, report(itn, Termination.MAX_ITER)
