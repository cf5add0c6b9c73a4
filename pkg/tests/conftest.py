import numpy as np
import pytest

from hybrid_bracket.algebra import generators


@pytest.fixture
def spin():
    """x, k and the Pauli matrices as dim-2 observables."""
    names = ("x", "k", "identity", "pauli_x", "pauli_y", "pauli_z")
    return {n: generators(n, 2) for n in names}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion for the summary."""

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
