import numpy as np
import pytest
from hypothesis import settings, strategies as st

from diracred import DiscreteConnection, TrivializedSpace

settings.register_profile("default", max_examples=50, deadline=None, derandomize=True)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_connection(rng, max_dim=6):
    """Random dims in 1..max_dim and dense H with entries in [-1, 1]."""
    sp = TrivializedSpace(int(rng.integers(1, max_dim + 1)), int(rng.integers(1, max_dim + 1)))
    return DiscreteConnection(sp, rng.uniform(-1, 1, (sp.dim_g, sp.dim_sigma)))


def rand_point(rng, sp):
    return sp.point(rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g))


def rand_cov(rng, sp):
    return sp.covector(rng.uniform(-1, 1, sp.dim_sigma), rng.uniform(-1, 1, sp.dim_g))


def flat(*parts):
    out = []
    for p in parts:
        out.append(p.flat() if hasattr(p, "flat") and not isinstance(p, np.ndarray) else np.atleast_1d(np.asarray(p, float)))
    return np.concatenate(out)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance report -----------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, passed: bool, detail: str) -> bool:
    line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
