import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhinverse import (Conductances, DivergenceError, DomainError, Exponents, ModelConstants,
                       TimeGrid, gating_steady_state, ionic_currents, rate_alpha,
                       rate_alpha_prime, rate_beta, rate_beta_prime, solve_forward)

from conftest import TRUE_E, TRUE_G

# reference values from 40-digit mpmath evaluations of the closed forms
ALPHA = [
    ("m", 0.0, 0.22356372458463003346),
    ("m", 25.0, 1.0),
    ("m", -40.0, 0.0097870690174995061684),
    ("n", 0.0, 0.058197670686932642439),
    ("n", 10.0, 0.1),
    ("n", 50.0, 0.40746294414550961918),
    ("h", 0.0, 0.07),
    ("h", 33.0, 0.013443493603452787997),
]
BETA = [
    ("m", 0.0, 4.0),
    ("m", 12.5, 1.9974071543971046819),
    ("n", 0.0, 0.125),
    ("n", -7.25, 0.13685729454787124044),
    ("h", 0.0, 0.047425873177566780879),
    ("h", 80.0, 0.99330714907571514444),
]
ALPHA_PRIME = [
    ("h", 0.0, -0.0035),
    ("m", 25.0, 0.05),
    ("n", 10.0, 0.005),
    ("m", 0.0, 0.015413053033083894457),
    ("n", 0.0, 0.0033869688733846589456),
    ("m", 60.0, 0.091876241347130857795),
]
BETA_PRIME = [
    ("m", 0.0, -4.0 / 18.0),
    ("n", 0.0, -0.125 / 80.0),
    ("h", 30.0, 0.025),
    ("h", 0.0, 0.0045176659730912132649),
]
STEADY = [
    ("m", 0.052932485257249574965),
    ("n", 0.31767691406069738999),
    ("h", 0.59612075350846024184),
]


@pytest.mark.parametrize("gate, v, expected", ALPHA)
def test_alpha_values(gate, v, expected):
    assert rate_alpha(gate, v) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("gate, v, expected", BETA)
def test_beta_values(gate, v, expected):
    assert rate_beta(gate, v) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("gate, v, expected", ALPHA_PRIME)
def test_alpha_slopes(gate, v, expected):
    assert rate_alpha_prime(gate, v) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("gate, v, expected", BETA_PRIME)
def test_beta_slopes(gate, v, expected):
    assert rate_beta_prime(gate, v) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("gate, expected", STEADY)
def test_steady_state_at_rest(gate, expected):
    assert gating_steady_state(gate, 0.0) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("gate, v0", [("m", 25.0), ("n", 10.0)])
@pytest.mark.parametrize("offset", [1e-12, 1e-9, 1e-6, 9.99e-4, 1.001e-3, 1e-2])
def test_removable_singularity_is_continuous(gate, v0, offset):
    limit = rate_alpha(gate, v0)
    slope = rate_alpha_prime(gate, v0)
    for v in (v0 - offset, v0 + offset):
        # second-order Taylor model around the singular point
        assert rate_alpha(gate, v) == pytest.approx(limit + slope * (v - v0), abs=1e-6)


def test_slopes_match_central_differences():
    h = 1e-5
    for gate in "mnh":
        for v in np.linspace(-80, 120, 41):
            fd_a = (rate_alpha(gate, v + h) - rate_alpha(gate, v - h)) / (2 * h)
            fd_b = (rate_beta(gate, v + h) - rate_beta(gate, v - h)) / (2 * h)
            assert rate_alpha_prime(gate, v) == pytest.approx(fd_a, rel=1e-6, abs=1e-10)
            assert rate_beta_prime(gate, v) == pytest.approx(fd_b, rel=1e-6, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(v=st.floats(-300, 300), gate=st.sampled_from("mnh"))
def test_rates_positive_and_steady_state_in_unit_interval(v, gate):
    a, b = rate_alpha(gate, v), rate_beta(gate, v)
    assert a > 0 and b > 0
    assert 0 <= gating_steady_state(gate, v) <= 1


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_rates_reject_non_finite_potential(bad):
    with pytest.raises(DomainError):
        rate_alpha("m", bad)
    with pytest.raises(DomainError):
        rate_beta_prime("h", bad)


def test_unknown_gate_rejected():
    with pytest.raises(DomainError):
        rate_alpha("k", 0.0)


def test_sodium_current_at_initial_state(consts):
    i_na, i_k, i_l = ionic_currents(consts, TRUE_G, TRUE_E, consts.initial_state)
    assert i_na == pytest.approx(-840.0, rel=1e-14)
    assert i_k == pytest.approx(36 * 0.4 ** 4 * (-13.0), rel=1e-14)
    assert i_l == pytest.approx(0.3 * (-35.598), rel=1e-14)


def test_currents_vanish_for_zero_conductance_or_driving_force(consts):
    assert ionic_currents(consts, Conductances(0, 0, 0), TRUE_E, (12.0, 0.3, 0.2, 0.7)) == (0, 0, 0)
    i_na, _, _ = ionic_currents(consts, TRUE_G, TRUE_E, (consts.e_na, 0.8, 0.3, 0.1))
    assert i_na == 0


def test_non_integer_power_of_zero_gate_rejected(consts):
    with pytest.raises(DomainError):
        ionic_currents(consts, TRUE_G, Exponents(2.5, 1, 4), (0.0, 0.0, 0.3, 0.5))


def test_constants_validation():
    with pytest.raises(DomainError):
        ModelConstants(c_m=0.0)
    with pytest.raises(DomainError):
        ModelConstants(h0=1.5)
    with pytest.raises(DomainError):
        Conductances(math.nan, 1, 1)


def test_grid_shape():
    grid = TimeGrid(10.0, 0.02)
    assert grid.n_steps == 500 and grid.n_nodes == 501
    with pytest.raises(DomainError):
        TimeGrid(1.0, 0.3)
    with pytest.raises(DomainError):
        TimeGrid(1.0, -0.1)


def test_forward_contract(consts, clean10):
    assert clean10.v.shape == (501,)
    assert (clean10.v[0], clean10.m[0], clean10.n[0], clean10.h[0]) == consts.initial_state
    assert not clean10.v.flags.writeable


def test_forward_first_step_is_explicit_euler(consts, clean10):
    v, m, n, h = consts.initial_state
    i_na, i_k, i_l = ionic_currents(consts, TRUE_G, TRUE_E, consts.initial_state)
    dt = 0.02
    assert clean10.v[1] == pytest.approx(v + dt * (consts.i_ext - i_na - i_k - i_l), rel=1e-14)
    am, bm = rate_alpha("m", v), rate_beta("m", v)
    assert clean10.m[1] == pytest.approx(m + dt * (am * (1 - m) - bm * m), rel=1e-14)


def test_zero_conductance_trajectory_is_constant(consts, grid10):
    traj = solve_forward(consts, Conductances(0, 0, 0), TRUE_E, grid10)
    assert np.all(traj.v == consts.v0)


def test_gates_stay_in_unit_interval(clean10):
    for gate in (clean10.m, clean10.n, clean10.h):
        assert gate.min() >= -1e-9 and gate.max() <= 1 + 1e-9


def test_voltage_clamp_equilibrates(consts):
    # zero conductances and no applied current hold V at v0
    traj = solve_forward(consts, Conductances(0, 0, 0), TRUE_E, TimeGrid(400.0, 0.01))
    for name in "mnh":
        assert getattr(traj, name)[-1] == pytest.approx(
            gating_steady_state(name, consts.v0), abs=1e-6)


def test_unstable_step_reports_divergence(consts):
    with pytest.raises(DivergenceError) as info:
        solve_forward(consts, Conductances(5e4, 36, 0.3), TRUE_E, TimeGrid(10.0, 0.02))
    assert info.value.step is not None and info.value.step > 0
