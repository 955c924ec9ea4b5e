"""Solve one ridge problem for many regularization parameters.

Each sweep sketches ``A`` once and reuses the sketch for every ``lam``:

* ``chol``: Gram matrix of the sketch once, then one small Cholesky per ``lam``.
* ``lowrank``: one thin SVD of the sketch, then a truncated Woodbury-form
  preconditioner per ``lam`` with rank ``alpha * ceil(sd_hat(lam))``.
* ``qr_baseline``: QR of ``[XA; sqrt(lam) I]`` per ``lam`` (tall problems only).
* ``unpreconditioned``: plain LSQR on the augmented system.

Tall problems are solved as ``min ||B R^{-1} y - [b; 0]||`` with ``x = R^{-1} y``.
Wide problems take the min-norm solution of ``R^{-T} D [x; y] = R^{-T} b`` and
keep the top ``n`` coordinates.
"""
from __future__ import annotations

import csv
import io
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .core import AugmentedOperator, ContractViolation, Orientation, ProblemInstance
from .precond import (
    CholeskyPreconditioner,
    IllConditioned,
    InvalidTruncation,
    SvdSketch,
    build_cholesky,
    build_gram,
    estimate_sd,
    lowrank_from_svd,
)
from .sketch import EmbeddingSpec, draw_embedding
from .solver import LeftPreconditioned, LsqrConfig, RightPreconditioned, SolveReport, lsqr

METHODS = ("chol", "lowrank", "qr_baseline", "unpreconditioned")
PILOT_SEED_OFFSET = 0x9E3779B9


class SweepError(ContractViolation):
    pass


class LambdaFailure(IllConditioned):
    """A per-``lam`` factorization failed; ``index`` is the position in ``lambdas``."""

    def __init__(self, index: int, lam: float, cause: Exception):
        super().__init__(f"lambda[{index}] = {lam:g}: {cause}")
        self.index = index
        self.lam = lam
        self.cause = cause


@dataclass
class SweepRequest:
    problem: ProblemInstance
    lambdas: list
    method: str = "chol"
    embedding: EmbeddingSpec | None = None
    alpha: float = 2.0
    solver: LsqrConfig = field(default_factory=LsqrConfig)
    sd_estimates: list | None = None
    sd_guess: float | None = None
    threads: int = 1
    keep_augmented: bool = False
    keep_preconditioners: bool = False

    def __post_init__(self):
        lams = np.atleast_1d(np.asarray(self.lambdas, dtype=np.float64))
        if lams.size == 0:
            raise SweepError("lambda list is empty")
        if not np.all(np.isfinite(lams)) or np.any(lams <= 0):
            raise SweepError("every lambda must be finite and > 0")
        self.lambdas = [float(v) for v in lams]
        if self.method not in METHODS:
            raise SweepError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.alpha < 1:
            raise SweepError(f"oversampling alpha must be >= 1, got {self.alpha}")
        if self.sd_estimates is not None and len(self.sd_estimates) != len(self.lambdas):
            raise SweepError("sd_estimates must match lambdas in length")
        if self.threads < 1:
            raise SweepError("threads must be >= 1")


@dataclass
class LambdaRecord:
    lam: float
    x: np.ndarray
    report: SolveReport
    residual_norm: float
    solution_norm: float
    rank: int | None = None
    sd_hat: float | None = None
    factor_time: float = 0.0
    solve_time: float = 0.0
    augmented: np.ndarray | None = None
    precond: object = None

    def to_json(self, include_solution: bool = True) -> dict:
        d = {
            "lambda": self.lam,
            "iterations": self.report.iterations,
            "termination": self.report.termination.value,
            "residual_norm": self.residual_norm,
            "solution_norm": self.solution_norm,
            "s_i": self.rank,
            "sd_hat": self.sd_hat,
            "factor_time": self.factor_time,
            "solve_time": self.solve_time,
            "residual_history": self.report.residual_history,
        }
        if include_solution:
            d["x"] = self.x.tolist()
        return d


@dataclass
class Counters:
    sketch_draws: int = 0
    pilot_draws: int = 0
    grams: int = 0
    svds: int = 0
    factorizations: int = 0


@dataclass
class SweepResult:
    method: str
    orientation: Orientation
    records: list
    embedding: EmbeddingSpec | None
    sketch_time: float = 0.0
    setup_time: float = 0.0
    counters: Counters = field(default_factory=Counters)
    notes: list = field(default_factory=list)

    @property
    def lambdas(self):
        return [r.lam for r in self.records]

    def solutions(self):
        return [r.x for r in self.records]

    def to_json(self, include_solution: bool = True) -> dict:
        return {
            "method": self.method,
            "orientation": self.orientation.value,
            "embedding": self.embedding.to_json() if self.embedding else None,
            "sketch_time": self.sketch_time,
            "setup_time": self.setup_time,
            "counters": vars(self.counters).copy(),
            "notes": list(self.notes),
            "records": [r.to_json(include_solution) for r in self.records],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "iters", "resid", "xnorm", "s_i", "sd_hat", "factor_time", "solve_time"])
        for r in self.records:
            w.writerow([
                repr(r.lam), r.report.iterations, repr(r.residual_norm), repr(r.solution_norm),
                "" if r.rank is None else r.rank,
                "" if r.sd_hat is None else repr(r.sd_hat),
                repr(r.factor_time), repr(r.solve_time),
            ])
        return buf.getvalue()


def _default_embedding(problem: ProblemInstance, kind="gaussian", seed=0) -> EmbeddingSpec:
    m, n = problem.shape
    small, big = min(m, n), max(m, n)
    return EmbeddingSpec(kind, min(4 * small, big), seed)


def _unique(lambdas):
    """Unique values and the index of each input in the unique list."""
    uniq = sorted(set(lambdas), reverse=True)
    pos = {v: i for i, v in enumerate(uniq)}
    return uniq, [pos[v] for v in lambdas]


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _finish(problem: ProblemInstance, lam, z, rep, factor_time, keep_aug, rank=None, sd_hat=None):
    A, b = problem.A, problem.b
    n = A.shape[1]
    x = z[:n].copy()
    return LambdaRecord(
        lam=lam,
        x=x,
        report=rep,
        residual_norm=float(np.linalg.norm(A @ x - b)),
        solution_norm=float(np.linalg.norm(x)),
        rank=rank,
        sd_hat=sd_hat,
        factor_time=factor_time,
        solve_time=rep.wall_time,
        augmented=z.copy() if keep_aug and z.shape[0] > n else None,
    )


def _solve_over(problem, lam, precond, cfg):
    op = RightPreconditioned(AugmentedOperator(problem.A, lam, "B"), precond)
    rhs = np.concatenate([problem.b, np.zeros(problem.shape[1])])
    y, rep = lsqr(op, rhs, cfg)
    return precond.apply_inverse(y), rep


def _solve_under(problem, lam, precond, cfg):
    op = LeftPreconditioned(AugmentedOperator(problem.A, lam, "D"), precond)
    rhs = precond.apply_inverse(problem.b, adjoint=True)
    return lsqr(op, rhs, cfg)


def _require(problem, orientation: Orientation, what: str):
    if problem.orientation is not orientation:
        raise SweepError(f"{what} needs an {orientation.value} problem")


def _fan_out(req, result, uniq, where, build, solve):
    """Build a preconditioner and solve for each unique lambda; restore input order."""

    def one(item):
        idx, lam = item
        t0 = time.perf_counter()
        try:
            precond, extra = build(lam)
        except IllConditioned as exc:
            raise LambdaFailure(req.lambdas.index(lam), lam, exc) from exc
        factor_time = time.perf_counter() - t0
        z, rep = solve(req.problem, lam, precond, req.solver)
        rec = _finish(req.problem, lam, z, rep, factor_time, req.keep_augmented, **extra)
        if req.keep_preconditioners:
            rec.precond = precond
        return rec

    records = _map(one, list(enumerate(uniq)), req.threads)
    result.counters.factorizations += len(uniq)
    result.records = [replace(records[i]) for i in where]
    return result


def _sketch(req: SweepRequest, side: str, default_kind="gaussian"):
    problem = req.problem
    spec = req.embedding or _default_embedding(problem, default_kind)
    ambient = problem.shape[0] if side == "left" else problem.shape[1]
    if spec.s > ambient:
        raise SweepError(f"sketch dimension {spec.s} exceeds ambient dimension {ambient}")
    t0 = time.perf_counter()
    X = draw_embedding(spec, ambient)
    if side == "left":
        Y = X.apply(problem.A)
    else:
        Y = np.asfortranarray(X.apply(problem.A.T).T)
    return spec, Y, time.perf_counter() - t0


def _cholesky_sweep(req: SweepRequest, orientation: Orientation) -> SweepResult:
    side = "left" if orientation is Orientation.OVER else "right"
    m, n = req.problem.shape
    spec, Y, t_sketch = _sketch(req, side)
    result = SweepResult("chol", orientation, [], spec, sketch_time=t_sketch)
    result.counters.sketch_draws += 1
    small = min(m, n)
    if spec.s < small:
        msg = f"sketch dimension {spec.s} < {small}; the low-rank method suits this regime better"
        warnings.warn(msg, stacklevel=3)
        result.notes.append(msg)
    t0 = time.perf_counter()
    C = build_gram(Y, side)
    result.counters.grams += 1
    result.setup_time = time.perf_counter() - t0
    uniq, where = _unique(req.lambdas)
    solve = _solve_over if orientation is Orientation.OVER else _solve_under
    return _fan_out(req, result, uniq, where, lambda lam: (build_cholesky(C, lam), {}), solve)


def solve_over_cholesky(req: SweepRequest) -> SweepResult:
    """Sketch ``Y = XA`` and ``C = Y^T Y`` once; per ``lam`` factor ``C + lam I`` and solve."""
    _require(req.problem, Orientation.OVER, "solve_over_cholesky")
    return _cholesky_sweep(req, Orientation.OVER)


def solve_under_cholesky(req: SweepRequest) -> SweepResult:
    """Sketch ``Y = AX`` and ``C = Y Y^T`` once; per ``lam`` factor and take the min-norm solve."""
    _require(req.problem, Orientation.UNDER, "solve_under_cholesky")
    return _cholesky_sweep(req, Orientation.UNDER)


def pilot_sd_estimates(req: SweepRequest, lambdas) -> tuple[np.ndarray, int]:
    """Estimate ``sd_lam(A)`` from the singular values of one pilot sketch.

    The pilot has size ``min(m, n, 4 ceil(sd_guess))``, or ``min(m, n)`` with no
    guess, and a seed derived from the main embedding seed.
    """
    problem = req.problem
    m, n = problem.shape
    small = min(m, n)
    s = small if req.sd_guess is None else max(1, min(small, 4 * math.ceil(req.sd_guess)))
    base = req.embedding or EmbeddingSpec("gaussian", 1, 0)
    spec = EmbeddingSpec(base.kind, s, (base.seed + PILOT_SEED_OFFSET) % 2**63)
    side = "left" if problem.orientation is Orientation.OVER else "right"
    ambient = m if side == "left" else n
    X = draw_embedding(spec, ambient)
    Y = X.apply(problem.A) if side == "left" else X.apply(problem.A.T)
    sigma = scipy.linalg.svdvals(Y)
    return np.array([estimate_sd(sigma, lam) for lam in lambdas]), s


def _lowrank_sweep(req: SweepRequest, orientation: Orientation) -> SweepResult:
    problem = req.problem
    m, n = problem.shape
    small = min(m, n)
    side = "left" if orientation is Orientation.OVER else "right"
    notes = []

    lambdas = np.array(req.lambdas)
    if req.sd_estimates is not None:
        sd = np.asarray(req.sd_estimates, dtype=np.float64)
        pilot = 0
    else:
        sd, pilot_s = pilot_sd_estimates(req, lambdas)
        pilot = 1
        notes.append(f"sd estimated from a pilot sketch of size {pilot_s}")

    order = np.argsort(-lambdas, kind="stable")
    want = np.array([max(1, int(math.ceil(req.alpha * math.ceil(v)))) for v in sd])
    s = int(want[order[-1]])
    if np.any(want > s):
        bad = int(np.argmax(want > s))
        raise InvalidTruncation(
            f"rank {want[bad]} for lambda[{bad}] = {lambdas[bad]:g} exceeds the sketch size {s} "
            "set by the smallest lambda; sd estimates are inconsistent"
        )
    if s > small:
        notes.append(f"sketch size {s} clamped to min(m, n) = {small}")
        s = small

    base = req.embedding or EmbeddingSpec("gaussian", s, 0)
    spec = EmbeddingSpec(base.kind, s, base.seed)
    t0 = time.perf_counter()
    ambient = m if side == "left" else n
    X = draw_embedding(spec, ambient)
    Y = X.apply(problem.A) if side == "left" else np.asfortranarray(X.apply(problem.A.T).T)
    t_sketch = time.perf_counter() - t0

    t0 = time.perf_counter()
    svd = SvdSketch.from_sketch(Y, side)
    result = SweepResult("lowrank", orientation, [], spec, sketch_time=t_sketch,
                         setup_time=time.perf_counter() - t0, notes=notes)
    result.counters.sketch_draws += 1
    result.counters.pilot_draws += pilot
    result.counters.svds += 1

    rank_of = {}
    sd_of = {}
    for lam, w, v in zip(lambdas, want, sd):
        rank_of[float(lam)] = int(min(max(w, 1), svd.rank))
        sd_of[float(lam)] = float(v)

    def build(lam):
        k = rank_of[lam]
        return lowrank_from_svd(svd, lam, k), {"rank": k, "sd_hat": sd_of[lam]}

    uniq, where = _unique(req.lambdas)
    solve = _solve_over if orientation is Orientation.OVER else _solve_under
    return _fan_out(req, result, uniq, where, build, solve)


def solve_over_lowrank(req: SweepRequest) -> SweepResult:
    """One sketch of size ``alpha ceil(sd(lam_min))`` and one SVD serve every ``lam``."""
    _require(req.problem, Orientation.OVER, "solve_over_lowrank")
    return _lowrank_sweep(req, Orientation.OVER)


def solve_under_lowrank(req: SweepRequest) -> SweepResult:
    """Wide-matrix mirror of :func:`solve_over_lowrank` using ``Y = AX``."""
    _require(req.problem, Orientation.UNDER, "solve_under_lowrank")
    return _lowrank_sweep(req, Orientation.UNDER)


def qr_preconditioner(Y, lam: float) -> CholeskyPreconditioner:
    """``R`` from a QR of ``[Y; sqrt(lam) I]``, rows signed so ``diag(R) > 0``."""
    n = Y.shape[1]
    stacked = np.vstack([Y, math.sqrt(lam) * np.eye(n)])
    R = scipy.linalg.qr(stacked, mode="r", check_finite=False)[0][:n]
    sign = np.sign(np.diag(R))
    sign[sign == 0] = 1.0
    return CholeskyPreconditioner(np.asfortranarray(R * sign[:, None]), lam)


def solve_qr_baseline(req: SweepRequest) -> SweepResult:
    """Blendenpik-style baseline: one sketch, then a fresh QR per ``lam``."""
    _require(req.problem, Orientation.OVER, "solve_qr_baseline")
    spec, Y, t_sketch = _sketch(req, "left")
    result = SweepResult("qr_baseline", Orientation.OVER, [], spec, sketch_time=t_sketch)
    result.counters.sketch_draws += 1
    uniq, where = _unique(req.lambdas)
    return _fan_out(req, result, uniq, where, lambda lam: (qr_preconditioner(Y, lam), {}), _solve_over)


class _Identity:
    def __init__(self, dim):
        self.dim = dim

    def apply_inverse(self, x, adjoint=False):
        return x


def solve_unpreconditioned(req: SweepRequest) -> SweepResult:
    """Plain LSQR on ``B`` or ``D``; the comparison point for iteration counts."""
    problem = req.problem
    orientation = problem.orientation
    result = SweepResult("unpreconditioned", orientation, [], None)
    uniq, where = _unique(req.lambdas)
    dim = problem.shape[1] if orientation is Orientation.OVER else problem.shape[0]
    solve = _solve_over if orientation is Orientation.OVER else _solve_under
    _fan_out(req, result, uniq, where, lambda lam: (_Identity(dim), {}), solve)
    result.counters.factorizations = 0
    return result


def run_sweep(req: SweepRequest) -> SweepResult:
    """Dispatch on ``req.method`` and the problem orientation."""
    over = req.problem.orientation is Orientation.OVER
    if req.method == "chol":
        return solve_over_cholesky(req) if over else solve_under_cholesky(req)
    if req.method == "lowrank":
        return solve_over_lowrank(req) if over else solve_under_lowrank(req)
    if req.method == "qr_baseline":
        return solve_qr_baseline(req)
    return solve_unpreconditioned(req)


@dataclass
class LCurve:
    lambdas: list
    log_residual: list
    log_solution: list
    corner: int | None

    def to_json(self) -> dict:
        return {
            "points": [
                {"lambda": l, "log_residual": r, "log_solution_norm": s}
                for l, r, s in zip(self.lambdas, self.log_residual, self.log_solution)
            ],
            "corner": self.corner,
            "corner_lambda": None if self.corner is None else self.lambdas[self.corner],
        }


def menger_curvature(points) -> np.ndarray:
    """Signed curvature of the circle through each interior vertex and its neighbours.

    Positive for clockwise turns, which is how an L-curve bends when walked from
    large to small ``lam``. End points and degenerate triples get 0.
    """
    P = np.asarray(points, dtype=np.float64)
    k = np.zeros(len(P))
    for i in range(1, len(P) - 1):
        a = P[i] - P[i - 1]
        b = P[i + 1] - P[i]
        c = P[i + 1] - P[i - 1]
        la, lb, lc = np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(c)
        if la == 0 or lb == 0 or lc == 0:
            continue
        cross = a[0] * b[1] - a[1] * b[0]
        k[i] = -2.0 * cross / (la * lb * lc)
    return k


def lcurve_points(lambdas, residual_norms, solution_norms) -> LCurve:
    order = np.argsort(-np.asarray(lambdas, dtype=np.float64), kind="stable")
    lams = [float(lambdas[i]) for i in order]
    lr = [float(np.log10(residual_norms[i])) for i in order]
    ls = [float(np.log10(solution_norms[i])) for i in order]
    corner = None
    if len(lams) >= 3:
        curv = menger_curvature(np.column_stack([lr, ls]))
        corner = int(np.argmax(curv[1:-1])) + 1
    return LCurve(lams, lr, ls, corner)


def lcurve(result: SweepResult) -> LCurve:
    """L-curve points ordered by ``lam`` descending, with the max-curvature corner."""
    recs = result.records
    return lcurve_points(
        [r.lam for r in recs], [r.residual_norm for r in recs], [r.solution_norm for r in recs]
    )
