import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhinverse import (Conductances, ContractError, DomainError, NoiseSpec, Observation,
                       ParameterVector, TimeGrid, add_noise, l2_norm, percent_error,
                       residual_norm, solve_forward)
from hhinverse.data import GENERATOR_NAME

from conftest import TRUE_E


def test_norm_of_zero_signal():
    assert l2_norm(np.zeros(11), 0.1) == 0.0


@pytest.mark.parametrize("value, t_end, dt, expected", [
    (1.0, 10.0, 0.02, math.sqrt(10.0)),
    (2.0, 5.0, 0.01, math.sqrt(20.0)),
])
def test_norm_of_constant(value, t_end, dt, expected):
    grid = TimeGrid(t_end, dt)
    assert l2_norm(np.full(grid.n_nodes, value), dt) == pytest.approx(expected, rel=1e-12)


def test_norm_uses_trapezoid_weights():
    # t on [0, 1] with two intervals: trapezoid gives 0.5*(0 + 2*0.25 + 1)/2 = 0.375
    assert l2_norm(np.array([0.0, 0.5, 1.0]), 0.5) ** 2 == pytest.approx(0.375)


def test_norm_rejects_bad_input():
    with pytest.raises(ContractError):
        l2_norm(np.array([]), 0.1)
    with pytest.raises(ContractError):
        l2_norm(np.ones((2, 2)), 0.1)
    with pytest.raises(DomainError):
        l2_norm(np.ones(3), 0.0)
    assert math.isnan(l2_norm(np.array([1.0, math.nan]), 0.1))


def test_clean_trace_norm(clean10):
    # independent trapezoid sum
    v = clean10.v
    direct = math.sqrt(0.02 * (np.sum(v ** 2) - 0.5 * v[0] ** 2 - 0.5 * v[-1] ** 2))
    assert l2_norm(v, 0.02) == pytest.approx(direct, rel=1e-13)
    assert 90 < direct < 110


def test_zero_noise_is_identity(clean10, grid10):
    obs = add_noise(clean10.v, NoiseSpec(0.0, 3), grid10)
    assert np.array_equal(obs.v_delta, clean10.v)
    assert obs.delta == 0.0


def test_noise_is_seeded(clean10, grid10):
    a = add_noise(clean10.v, NoiseSpec(0.05, 11), grid10)
    b = add_noise(clean10.v, NoiseSpec(0.05, 11), grid10)
    c = add_noise(clean10.v, NoiseSpec(0.05, 12), grid10)
    assert np.array_equal(a.v_delta, b.v_delta)
    assert not np.array_equal(a.v_delta, c.v_delta)
    assert a.generator == GENERATOR_NAME and a.seed == 11


def test_delta_is_relative_to_clean_norm(clean10, grid10):
    obs = add_noise(clean10.v, NoiseSpec(0.01, 0), grid10)
    assert obs.delta == pytest.approx(0.01 * l2_norm(clean10.v, 0.02), rel=1e-14)


def test_noise_is_multiplicative_and_bounded_pointwise(clean10, grid10):
    obs = add_noise(clean10.v, NoiseSpec(0.25, 5), grid10)
    ratio = np.abs(obs.v_delta - clean10.v) <= 0.25 * np.abs(clean10.v) + 1e-12
    assert ratio.all()


@settings(max_examples=60, deadline=None)
@given(eps=st.floats(0, 2), seed=st.integers(0, 2 ** 32))
def test_noise_bound(clean10, grid10, eps, seed):
    obs = add_noise(clean10.v, NoiseSpec(eps, seed), grid10)
    assert l2_norm(clean10.v - obs.v_delta, grid10.dt) <= obs.delta * (1 + 1e-12)


def test_noise_spec_validation():
    with pytest.raises(DomainError):
        NoiseSpec(-0.1, 0)
    with pytest.raises(DomainError):
        NoiseSpec(0.1, -1)
    with pytest.raises(DomainError):
        NoiseSpec(math.nan, 0)


def test_observation_shape_checked(grid10):
    with pytest.raises(ContractError):
        Observation(grid10, np.zeros(10), 1.0)


def test_residual_norm_zero_for_exact_fit(clean10, grid10):
    obs = add_noise(clean10.v, NoiseSpec(0.3, 1), grid10)
    assert residual_norm(obs, obs.v_delta) == 0.0


def test_residual_at_zero_conductances(consts, grid10, clean10):
    obs = add_noise(clean10.v, NoiseSpec(1.25, 1), grid10)
    flat = solve_forward(consts, Conductances(0, 0, 0), TRUE_E, grid10)
    assert residual_norm(obs, flat.v) == pytest.approx(161, rel=0.1)


def test_residual_norm_grid_mismatch(clean10, grid10):
    obs = add_noise(clean10.v, NoiseSpec(0.1, 1), grid10)
    with pytest.raises(ContractError):
        residual_norm(obs, np.zeros(100))


@pytest.mark.parametrize("iterate, expected", [
    ((120, 36, 0.3), 0.0),
    ((0, 0, 0), 100.0),
])
def test_percent_error_trivial(iterate, expected):
    assert percent_error((120, 36, 0.3), iterate) == pytest.approx(expected, abs=1e-12)


def test_percent_error_exponent_row():
    err = percent_error((3, 1, 4), (3.008, 0.954, 3.674))
    assert err == pytest.approx(100 * math.sqrt(0.008 ** 2 + 0.046 ** 2 + 0.326 ** 2) / math.sqrt(26))
    assert err == pytest.approx(6.46, abs=0.01)


def test_percent_error_accepts_parameter_vectors():
    truth = ParameterVector("exponents", (3, 1, 4))
    assert percent_error(truth, ParameterVector("exponents", (3, 1, 4))) == 0.0


def test_percent_error_zero_reference():
    with pytest.raises(DomainError):
        percent_error((0, 0, 0), (1, 1, 1))


@settings(max_examples=100, deadline=None)
@given(scale=st.floats(1e-100, 1e3), sign=st.sampled_from((-1.0, 1.0)),
       seed=st.integers(0, 1000))
def test_norm_scales_linearly(scale, sign, seed):
    # magnitudes stay far from underflow of the squared samples
    scale *= sign
    s = np.random.default_rng(seed).normal(size=101)
    assert l2_norm(scale * s, 0.05) == pytest.approx(abs(scale) * l2_norm(s, 0.05),
                                                    rel=1e-12)
