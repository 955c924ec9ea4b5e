"""Synthetic test problems: ``A = Q1 diag(sigma) Q2^T`` and ``b = A x + eta``."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import ContractViolation, ProblemInstance


@dataclass(frozen=True)
class GeneratorSpec:
    m: int
    n: int
    sigma_max: float = 1.0
    sigma_min: float = 1e-6
    noise_norm: float = 1e-3
    seed: int = 0
    singular_values: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractViolation(f"m and n must be >= 1, got {self.m}x{self.n}")
        if not (self.sigma_max >= self.sigma_min > 0):
            raise ContractViolation(
                f"need sigma_max >= sigma_min > 0, got {self.sigma_max}, {self.sigma_min}"
            )
        if self.noise_norm < 0:
            raise ContractViolation(f"noise_norm must be >= 0, got {self.noise_norm}")
        if self.singular_values is not None:
            sv = tuple(float(v) for v in self.singular_values)
            if len(sv) != min(self.m, self.n):
                raise ContractViolation(
                    f"spectrum has {len(sv)} values, expected min(m, n) = {min(self.m, self.n)}"
                )
            object.__setattr__(self, "singular_values", sv)

    def spectrum(self) -> np.ndarray:
        if self.singular_values is not None:
            return np.array(self.singular_values)
        k = min(self.m, self.n)
        return np.logspace(np.log10(self.sigma_max), np.log10(self.sigma_min), k)

    def describe(self) -> dict:
        d = asdict(self)
        d.pop("singular_values")
        d["spectrum"] = "explicit" if self.singular_values is not None else "exp_decay"
        return d


def _orthonormal(rng, rows, cols):
    Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    # sign-fix so Q is a deterministic function of the Gaussian draw
    return Q * np.sign(np.diag(R))


def generate_problem(spec: GeneratorSpec) -> tuple[ProblemInstance, np.ndarray]:
    """Return the problem and the ground-truth ``x`` used to build ``b``."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    m, n = spec.m, spec.n
    k = min(m, n)
    sigma = spec.spectrum()
    Q1 = _orthonormal(rng, m, k)
    Q2 = _orthonormal(rng, n, k)
    A = np.asfortranarray((Q1 * sigma) @ Q2.T)
    x = rng.standard_normal(n)
    g = rng.standard_normal(m)
    gnorm = np.linalg.norm(g)
    eta = spec.noise_norm * g / gnorm if gnorm > 0 else np.zeros(m)
    b = A @ x + eta
    meta = {
        "generator": spec.describe(),
        "seed": spec.seed,
        "noise_norm": spec.noise_norm,
    }
    return ProblemInstance.from_arrays(A, b, meta), x
