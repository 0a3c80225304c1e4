import numpy as np
import pytest
from scipy.stats import unitary_group

from ide_tradeoff.channels import IdeParams
from ide_tradeoff.presets import example1


@pytest.fixture
def ex1():
    return example1(0.05)


def random_params(rng, d=3, allow_erasure=True):
    """Random valid IdeParams; pi kept away from the excluded endpoints."""
    triples = []
    for _ in range(2):
        w = rng.dirichlet(np.ones(3))
        if not allow_erasure:
            w[2] = 0.0
            w /= w.sum()
        triples.append(tuple(w))
    theta1 = rng.uniform(0, 1)
    pi1 = rng.uniform(0.05, 0.95)
    # exact sums keep validation tolerances out of the picture
    fixed = [(a, b, 1.0 - a - b) for a, b, _ in triples]
    return IdeParams.from_states(d, fixed[0], fixed[1], theta1, pi1)


def random_unitary(n, seed):
    return unitary_group.rvs(n, random_state=seed)


def random_density(rng, n, rank=None):
    rank = rank or n
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


ACCEPTANCE_RESULTS: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_RESULTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
