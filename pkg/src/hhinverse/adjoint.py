"""Backward adjoint sweeps that turn a data residual into sensitivities.

Both inverse problems share one adjoint system in (U, P, Q, R); they only
differ in which triple is the current iterate and which is known. The
sweep is the exact transpose of the linearized explicit Euler scheme, so
gradients assembled from it are the true gradients of the discrete
misfit ``0.5 * ||V_delta - V||**2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractError, DivergenceError
from .model import Conductances, Exponents, ModelConstants, TimeGrid, Trajectory


@dataclass(frozen=True, eq=False)
class ResidualSignal:
    """Samples of ``V_delta - V`` on ``grid``."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.grid.n_nodes,):
            raise ContractError(
                f"residual has shape {arr.shape}, grid expects ({self.grid.n_nodes},)")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def between(cls, observed, fwd: Trajectory):
        """Residual of observed samples against a forward trajectory."""
        return cls(fwd.grid, np.asarray(observed, dtype=float) - fwd.v)


@dataclass(frozen=True, eq=False)
class AdjointTrajectory:
    grid: TimeGrid
    u: np.ndarray
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        for name in ("u", "p", "q", "r"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n_nodes,):
                raise ContractError(
                    f"{name} has shape {arr.shape}, expected ({self.grid.n_nodes},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _sweep(consts, g, e, fwd, resid):
    if not fwd.grid.compatible(resid.grid):
        raise ContractError("forward trajectory and residual are on different grids")
    grid = fwd.grid
    size = grid.n_nodes
    u, p, q, r = (np.empty(size) for _ in range(4))
    weights = _kernels.trapezoid_weights(size, float(grid.dt))
    bad = _kernels.adjoint_sweep(
        fwd.v, fwd.m, fwd.n, fwd.h, resid.values, weights, consts._packed(),
        np.array(g.as_tuple(), dtype=float), np.array(e.as_tuple(), dtype=float),
        float(grid.dt), u, p, q, r)
    if bad >= 0:
        raise DivergenceError(f"adjoint solve diverged at node {bad}", step=bad)
    return AdjointTrajectory(grid, u, p, q, r)


def solve_adjoint_conductances(consts: ModelConstants, g: Conductances, e: Exponents,
                               fwd: Trajectory, resid: ResidualSignal) -> AdjointTrajectory:
    """Adjoint for the conductance problem; ``g`` is the current iterate and
    ``e`` the known exponents."""
    return _sweep(consts, g, e, fwd, resid)


def solve_adjoint_exponents(consts: ModelConstants, g: Conductances, e_iter: Exponents,
                            fwd: Trajectory, resid: ResidualSignal) -> AdjointTrajectory:
    """Adjoint for the exponent problem; ``g`` is known and ``e_iter`` is the
    current iterate. Powers of the gates use floored values."""
    return _sweep(consts, g, e_iter, fwd, resid)
