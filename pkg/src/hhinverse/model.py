"""Space-clamped Hodgkin-Huxley model: rate functions, currents and the
fixed-step explicit Euler forward solver.

Voltages are in mV, time in ms, conductances in mS/cm^2, capacitance in
uF/cm^2 and current densities in uA/cm^2. The rate functions use the
shifted convention with the resting potential at 0 mV.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _kernels
from .errors import DivergenceError, DomainError

Gate = Literal["m", "n", "h"]
GATES = ("m", "n", "h")
GATE_FLOOR = _kernels.GATE_FLOOR


@dataclass(frozen=True)
class ModelConstants:
    """Known physical data of the membrane patch."""

    c_m: float = 1.0
    e_na: float = 115.0
    e_k: float = -12.0
    e_l: float = 10.598
    i_ext: float = 0.0
    v0: float = -25.0
    m0: float = 0.5
    n0: float = 0.4
    h0: float = 0.4

    def __post_init__(self):
        for name in ("c_m", "e_na", "e_k", "e_l", "i_ext", "v0", "m0", "n0", "h0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.c_m <= 0:
            raise DomainError(f"c_m must be positive, got {self.c_m}")
        for name in ("m0", "n0", "h0"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")

    @property
    def initial_state(self):
        return (self.v0, self.m0, self.n0, self.h0)

    def _packed(self):
        return np.array([self.c_m, self.e_na, self.e_k, self.e_l, self.i_ext])


def _check_finite_triple(obj, names):
    for name in names:
        value = getattr(obj, name)
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Conductances:
    """Maximal conductances. Negative values are allowed: Landweber
    iterates are unconstrained."""

    g_na: float
    g_k: float
    g_l: float

    def __post_init__(self):
        _check_finite_triple(self, ("g_na", "g_k", "g_l"))

    def as_tuple(self):
        return (self.g_na, self.g_k, self.g_l)


@dataclass(frozen=True)
class Exponents:
    """Real gating exponents: m**a * h**b for sodium, n**c for potassium."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        _check_finite_triple(self, ("a", "b", "c"))

    def as_tuple(self):
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, t_end] with ``n_steps`` intervals of width ``dt``."""

    t_end: float
    dt: float
    n_steps: int = field(default=-1)

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and math.isfinite(self.dt)):
            raise DomainError("t_end and dt must be finite")
        if self.dt <= 0 or self.t_end <= 0:
            raise DomainError(f"t_end and dt must be positive, got {self.t_end}, {self.dt}")
        n_steps = self.n_steps
        if n_steps < 0:
            n_steps = int(round(self.t_end / self.dt))
            object.__setattr__(self, "n_steps", n_steps)
        if n_steps < 1:
            raise DomainError(f"grid needs at least one step, got n_steps={n_steps}")
        # dt may not divide t_end exactly in binary; allow a few ulps
        if abs(n_steps * self.dt - self.t_end) > 1e-12 * self.t_end + 4 * n_steps * np.spacing(self.dt):
            raise DomainError(
                f"n_steps*dt = {n_steps * self.dt!r} does not match t_end = {self.t_end!r}")

    @property
    def n_nodes(self):
        return self.n_steps + 1

    @property
    def times(self):
        return np.arange(self.n_nodes) * self.dt

    def compatible(self, other):
        return (self.n_steps == other.n_steps
                and math.isclose(self.dt, other.dt, rel_tol=1e-12))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of (V, m, n, h) at every node of ``grid``."""

    grid: TimeGrid
    v: np.ndarray
    m: np.ndarray
    n: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        for name in ("v", "m", "n", "h"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n_nodes,):
                raise DomainError(
                    f"{name} has shape {arr.shape}, expected ({self.grid.n_nodes},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def times(self):
        return self.grid.times


def _as_gate(gate):
    if gate not in GATES:
        raise DomainError(f"unknown gate {gate!r}; expected one of {GATES}")
    return GATES.index(gate)


def _check_v(v):
    v = float(v)
    if not math.isfinite(v):
        raise DomainError(f"potential must be finite, got {v!r}")
    return v


def rate_alpha(gate: Gate, v: float) -> float:
    """Opening rate alpha for ``gate`` at potential ``v`` (1/ms).

    The removable singularities of alpha_m at 25 mV and alpha_n at 10 mV
    are evaluated through a Taylor series.
    """
    i = _as_gate(gate)
    return _kernels.rates(_check_v(v))[2 * i]


def rate_beta(gate: Gate, v: float) -> float:
    """Closing rate beta for ``gate`` at potential ``v`` (1/ms)."""
    i = _as_gate(gate)
    return _kernels.rates(_check_v(v))[2 * i + 1]


def rate_alpha_prime(gate: Gate, v: float) -> float:
    """d(alpha)/dV, analytic, in 1/(ms mV)."""
    i = _as_gate(gate)
    return _kernels.rate_slopes(_check_v(v))[2 * i]


def rate_beta_prime(gate: Gate, v: float) -> float:
    """d(beta)/dV, analytic, in 1/(ms mV)."""
    i = _as_gate(gate)
    return _kernels.rate_slopes(_check_v(v))[2 * i + 1]


def gating_steady_state(gate: Gate, v: float) -> float:
    """Clamped-voltage equilibrium alpha / (alpha + beta)."""
    alpha = rate_alpha(gate, v)
    beta = rate_beta(gate, v)
    if alpha + beta == 0:
        raise DomainError(f"alpha + beta vanishes for gate {gate!r} at v={v}")
    return alpha / (alpha + beta)


def _real_power(x, p, name):
    if x <= 0 and p != int(p):
        raise DomainError(f"{name}={x} raised to non-integer power {p}")
    if x == 0 and p < 0:
        raise DomainError(f"{name}=0 raised to negative power {p}")
    return x ** p


def ionic_currents(consts: ModelConstants, g: Conductances, e: Exponents, state):
    """Return ``(i_na, i_k, i_l)`` for ``state = (v, m, n, h)``."""
    v, m, n, h = (float(s) for s in state)
    i_na = g.g_na * _real_power(m, e.a, "m") * _real_power(h, e.b, "h") * (v - consts.e_na)
    i_k = g.g_k * _real_power(n, e.c, "n") * (v - consts.e_k)
    i_l = g.g_l * (v - consts.e_l)
    return i_na, i_k, i_l


def solve_forward(consts: ModelConstants, g: Conductances, e: Exponents,
                  grid: TimeGrid) -> Trajectory:
    """Integrate the HH system with explicit Euler on ``grid``.

    Raises
    ------
    DivergenceError
        If any state becomes non-finite; ``step`` is the first bad node.
    """
    size = grid.n_nodes
    v, m, n, h = (np.empty(size) for _ in range(4))
    bad = _kernels.forward_sweep(
        np.array(consts.initial_state), consts._packed(),
        np.array(g.as_tuple(), dtype=float), np.array(e.as_tuple(), dtype=float),
        float(grid.dt), v, m, n, h)
    if bad >= 0:
        raise DivergenceError(f"forward solve diverged at node {bad}", step=bad)
    return Trajectory(grid, v, m, n, h)
