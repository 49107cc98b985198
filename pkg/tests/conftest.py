import numpy as np
import pytest

from cgqst.optimizer import OptimizerConfig, optimize


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def optimized_full():
    return optimize(OptimizerConfig(construction="full-class2", restarts=1, seed=0))


@pytest.fixture(scope="session")
def optimized_efficient():
    return optimize(OptimizerConfig(construction="gate-efficient", restarts=1, seed=0))


ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def check(number, title, ok, detail=""):
        ACCEPTANCE_LINES.append((number, title, bool(ok), detail))
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda line: line[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
