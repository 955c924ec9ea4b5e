import numpy as np
import pytest

from ridge_sketch.generate import GeneratorSpec, generate_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_problem(m, n, sigma_min=1e-6, seed=0, noise=1e-3, sigma_max=1.0):
    """Synthetic problem with a log-spaced spectrum from ``sigma_max`` down to ``sigma_min``."""
    spec = GeneratorSpec(m, n, sigma_max=sigma_max, sigma_min=sigma_min, noise_norm=noise, seed=seed)
    return generate_problem(spec)[0]


def rel_err(x, ref):
    return float(np.linalg.norm(x - ref) / np.linalg.norm(ref))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
