import numpy as np
import pytest

from gpucopula._rng import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


def clustered_nodes(m: int):
    """Gauss-Legendre nodes on (0, 1) pushed towards both ends.

    Maps t to u = sin^2(pi t / 2), which squeezes nodes quadratically near
    0 and 1 where beta kernels with large shape parameters live.
    """
    t, w = np.polynomial.legendre.leggauss(m)
    t = (t + 1.0) / 2.0
    w = w / 2.0
    u = np.sin(np.pi * t / 2.0) ** 2
    du = np.pi / 2.0 * np.sin(np.pi * t)
    return u, w * du


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
