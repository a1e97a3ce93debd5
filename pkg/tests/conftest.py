import numpy as np
import pytest

EXAMPLE1_H1 = np.diag([0.5, 2.0]).astype(complex)
EXAMPLE1_H2 = np.diag([2.0, 0.5]).astype(complex)

_acceptance_lines = []


@pytest.fixture
def example1():
    return EXAMPLE1_H1.copy(), EXAMPLE1_H2.copy()


@pytest.fixture
def record_criterion():
    """Record a one-line PASS/FAIL verdict printed at the end of the session."""

    def record(label, ok, detail=""):
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else ""))
        return ok

    return record


def random_complex(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def matched_pair(rng, n_r, n_t1, n_t2):
    """Random pair with the second matrix rescaled to the first's singular-value product."""
    h1 = random_complex(rng, n_r, n_t1)
    h2 = random_complex(rng, n_r, n_t2)
    p1 = np.prod(np.linalg.svd(h1, compute_uv=False))
    p2 = np.prod(np.linalg.svd(h2, compute_uv=False))
    return h1, h2 * (p1 / p2) ** (1.0 / n_r)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
