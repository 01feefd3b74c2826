import numpy as np
import pytest

from hhinverse import (Conductances, Exponents, ModelConstants, NoiseSpec, TimeGrid, add_noise,
                       l2_norm, solve_forward)

TRUE_G = Conductances(120.0, 36.0, 0.3)
TRUE_E = Exponents(3.0, 1.0, 4.0)


@pytest.fixture(scope="session")
def consts():
    return ModelConstants()


@pytest.fixture(scope="session")
def grid10():
    return TimeGrid(10.0, 0.02)


@pytest.fixture(scope="session")
def grid5():
    return TimeGrid(5.0, 0.02)


@pytest.fixture(scope="session")
def clean10(consts, grid10):
    return solve_forward(consts, TRUE_G, TRUE_E, grid10)


def misfit(consts, grid, v_obs, kind, x, known):
    """Independent evaluation of 0.5 * ||v_obs - F(x)||^2 by forward solves only."""
    g, e = (Conductances(*x), known) if kind == "conductances" else (known, Exponents(*x))
    v = solve_forward(consts, g, e, grid).v
    return 0.5 * l2_norm(v_obs - v, grid.dt) ** 2


def fd_gradient(consts, grid, v_obs, kind, x, known, step):
    """Central-difference gradient of the misfit."""
    out = []
    for i in range(3):
        xp, xm = list(x), list(x)
        xp[i] += step
        xm[i] -= step
        out.append((misfit(consts, grid, v_obs, kind, xp, known)
                    - misfit(consts, grid, v_obs, kind, xm, known)) / (2 * step))
    return np.array(out)


def noisy(consts, grid, epsilon, seed=7):
    clean = solve_forward(consts, TRUE_G, TRUE_E, grid)
    return clean, add_noise(clean.v, NoiseSpec(epsilon, seed), grid)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
