"""Adjoint-based Landweber iteration with discrepancy-principle stopping."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from . import _kernels
from .data import l2_norm, percent_error
from .errors import ContractError, DivergenceError, DomainError, ZeroGradientError
from .adjoint import AdjointTrajectory
from .model import Conductances, Exponents, ModelConstants, TimeGrid, Trajectory

log = logging.getLogger(__name__)

Kind = Literal["conductances", "exponents"]
KINDS = ("conductances", "exponents")
STOP_REASONS = ("discrepancy", "residual_floor", "max_iterations", "zero_gradient", "stalled")


@dataclass(frozen=True)
class ParameterVector:
    """The unknown triple of an inverse problem, tagged with its kind."""

    kind: Kind
    values: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        values = tuple(float(x) for x in self.values)
        if len(values) != 3:
            raise DomainError(f"expected three values, got {len(values)}")
        if not all(math.isfinite(x) for x in values):
            raise DomainError(f"parameter values must be finite, got {values}")
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, model_params):
        if isinstance(model_params, Conductances):
            return cls("conductances", model_params.as_tuple())
        if isinstance(model_params, Exponents):
            return cls("exponents", model_params.as_tuple())
        raise TypeError(f"cannot build a ParameterVector from {type(model_params).__name__}")

    def to_model(self):
        if self.kind == "conductances":
            return Conductances(*self.values)
        return Exponents(*self.values)


@dataclass(frozen=True)
class StoppingRule:
    tau: float = 2.01
    delta: float = 0.0
    max_iterations: int = 500_000
    # stopping threshold used when delta == 0 and the discrepancy test never fires
    residual_floor: float = 1e-10

    def __post_init__(self):
        if not self.tau > 2:
            raise DomainError(f"tau must exceed 2, got {self.tau}")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise DomainError(f"delta must be finite and >= 0, got {self.delta}")
        if int(self.max_iterations) < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")

    @property
    def threshold(self):
        return self.tau * self.delta


@dataclass(frozen=True)
class IterationRecord:
    k: int
    iterate: ParameterVector
    residual_norm: float
    percent_error: Optional[float] = None


@dataclass(frozen=True, eq=False)
class RunResult:
    """Full trace of a Landweber run.

    The trace is stored column-wise (``iterates`` is ``(k_star, 3)``);
    :attr:`records` materializes it as :class:`IterationRecord` objects.
    Iteration ``k`` lives in row ``k - 1``; ``step_sizes[k - 1]`` is the
    step that produced iteration ``k + 1``.
    """

    kind: Kind
    iterates: np.ndarray
    residuals: np.ndarray
    errors: Optional[np.ndarray]
    stop_reason: str
    step_sizes: np.ndarray
    tau: float
    delta: float

    @property
    def k_star(self):
        return len(self.residuals)

    @property
    def final_iterate(self):
        return ParameterVector(self.kind, tuple(self.iterates[-1]))

    @property
    def final_residual(self):
        return float(self.residuals[-1])

    @property
    def final_error(self):
        return None if self.errors is None else float(self.errors[-1])

    def record(self, k):
        if not 1 <= k <= self.k_star:
            raise IndexError(f"iteration {k} outside 1..{self.k_star}")
        err = None if self.errors is None else float(self.errors[k - 1])
        return IterationRecord(k, ParameterVector(self.kind, tuple(self.iterates[k - 1])),
                               float(self.residuals[k - 1]), err)

    @property
    def records(self):
        return [self.record(k) for k in range(1, self.k_star + 1)]


def _gradient_weights(grid):
    # exact transpose of explicit Euler: left-endpoint rule (U vanishes at T)
    w = np.full(grid.n_nodes, float(grid.dt))
    w[-1] = 0.0
    return w


def _floored(x):
    return np.maximum(x, _kernels.GATE_FLOOR)


def _check_same_grid(fwd, adj):
    if not fwd.grid.compatible(adj.grid):
        raise ContractError("forward and adjoint trajectories are on different grids")


def _conductance_terms(v, m, n, h, wu, consts, e):
    x_na = np.dot(wu, _floored(m) ** e[0] * _floored(h) ** e[1] * (v - consts.e_na))
    x_k = np.dot(wu, _floored(n) ** e[2] * (v - consts.e_k))
    x_l = np.dot(wu, v - consts.e_l)
    return (float(x_na), float(x_k), float(x_l))


def _exponent_terms(v, m, n, h, wu, consts, g, e):
    mf, nf, hf = _floored(m), _floored(n), _floored(h)
    na = wu * g[0] * (v - consts.e_na) * mf ** e[0] * hf ** e[1]
    k = wu * g[1] * (v - consts.e_k) * nf ** e[2]
    return (float(np.dot(na, np.log(mf))), float(np.dot(na, np.log(hf))),
            float(np.dot(k, np.log(nf))))


def gradient_conductances(fwd: Trajectory, adj: AdjointTrajectory, consts: ModelConstants,
                          e: Exponents):
    """Sensitivities ``(X_Na, X_K, X_L)`` of the misfit w.r.t. the conductances.

    Equal to minus the gradient of ``0.5 * ||V_delta - V||**2``.
    """
    _check_same_grid(fwd, adj)
    wu = _gradient_weights(fwd.grid) * adj.u
    return _conductance_terms(fwd.v, fwd.m, fwd.n, fwd.h, wu, consts, e.as_tuple())


def gradient_exponents(fwd: Trajectory, adj: AdjointTrajectory, consts: ModelConstants,
                       g: Conductances, e_iter: Exponents):
    """Sensitivities ``(X_a, X_b, X_c)`` w.r.t. the gating exponents.

    The integrands carry ``ln`` of the gates, so samples are floored first.
    """
    _check_same_grid(fwd, adj)
    for name in ("m", "n", "h"):
        if np.any(getattr(fwd, name) <= 0):
            log.warning("gate %s has non-positive samples; logarithms use the floor %g",
                        name, _kernels.GATE_FLOOR)
    wu = _gradient_weights(fwd.grid) * adj.u
    return _exponent_terms(fwd.v, fwd.m, fwd.n, fwd.h, wu, consts,
                           g.as_tuple(), e_iter.as_tuple())


def step_size(residual_norm: float, gradient: Sequence[float]) -> float:
    """``residual_norm**2 / ||gradient||**2``."""
    if residual_norm < 0:
        raise DomainError(f"residual norm must be >= 0, got {residual_norm}")
    if residual_norm == 0:
        return 0.0
    gnorm2 = float(np.dot(gradient, gradient))
    if gnorm2 == 0:
        raise ZeroGradientError("gradient vanished with a nonzero residual")
    return residual_norm ** 2 / gnorm2


def landweber_step(iterate: ParameterVector, w: float, gradient: Sequence[float]) -> ParameterVector:
    values = tuple(x + w * d for x, d in zip(iterate.values, gradient))
    if not all(math.isfinite(x) for x in values):
        raise DivergenceError(f"Landweber update produced {values}", step=None)
    return ParameterVector(iterate.kind, values)


def run_inversion(consts: ModelConstants, guess: ParameterVector, known, grid: TimeGrid,
                  observed, rule: StoppingRule,
                  truth: Optional[ParameterVector] = None, safeguard: bool = True,
                  max_halvings: int = 60, sufficient_decrease: float = 0.0) -> RunResult:
    """Landweber iteration from ``guess`` until the discrepancy principle fires.

    Parameters
    ----------
    consts : ModelConstants
    guess : ParameterVector
        Initial iterate; its ``kind`` selects the unknown triple.
    known : Conductances or Exponents
        The triple held fixed during the run (the other kind).
    grid : TimeGrid
    observed : array_like or Observation
        Noisy voltage samples on ``grid``.
    rule : StoppingRule
    truth : ParameterVector, optional
        When given, the percent error of every iterate is recorded.
    safeguard : bool
        Halve the step until the forward solve stays finite and the
        residual does not grow. Without it, any non-finite forward solve
        aborts the run.
    max_halvings : int
        Halvings tried per iteration before giving up; the run then stops
        with ``stop_reason="stalled"`` (or raises if the last trial diverged).
    sufficient_decrease : float
        Armijo constant ``c`` in ``[0, 0.5)``. With ``c > 0`` a safeguarded step
        must satisfy ``0.5*res_new**2 <= 0.5*res**2 - c*w*||X||**2``. The
        default 0 only asks for a non-increasing residual.

    Raises
    ------
    DivergenceError
        If a forward or adjoint sweep blows up; ``iteration`` is set.
    """
    if guess.kind == "conductances" and not isinstance(known, Exponents):
        raise ContractError("conductance runs need the exponents as the known triple")
    if guess.kind == "exponents" and not isinstance(known, Conductances):
        raise ContractError("exponent runs need the conductances as the known triple")
    if not 0 <= sufficient_decrease < 0.5:
        raise DomainError(f"sufficient_decrease must lie in [0, 0.5), got {sufficient_decrease}")
    if truth is not None and truth.kind != guess.kind:
        raise ContractError(f"truth is {truth.kind}, guess is {guess.kind}")
    obs_grid = getattr(observed, "grid", None)
    if obs_grid is not None and not obs_grid.compatible(grid):
        raise ContractError("observation grid does not match the run grid")
    v_obs = np.array(getattr(observed, "v_delta", observed), dtype=float)
    if v_obs.shape != (grid.n_nodes,):
        raise ContractError(f"observation has shape {v_obs.shape}, grid expects ({grid.n_nodes},)")

    dt = float(grid.dt)
    size = grid.n_nodes
    state0 = np.array(consts.initial_state)
    packed = consts._packed()
    trap = _kernels.trapezoid_weights(size, dt)
    fixed = np.array(known.as_tuple(), dtype=float)
    v, m, n, h, u, p, q, r = (np.empty(size) for _ in range(8))
    threshold = rule.threshold
    max_it = int(rule.max_iterations)

    iterates = np.empty((min(max_it, 4096), 3))
    residuals = np.empty(iterates.shape[0])
    errors = np.empty(iterates.shape[0]) if truth is not None else None

    grad_w = _gradient_weights(grid)
    unknown_is_g = guess.kind == "conductances"

    def forward(x):
        g_arr, e_arr = (x, fixed) if unknown_is_g else (fixed, x)
        return _kernels.forward_sweep(state0, packed, g_arr, e_arr, dt, v, m, n, h)

    steps = []
    x = np.array(guess.values, dtype=float)
    bad = forward(x)
    if bad >= 0:
        raise DivergenceError(f"forward solve diverged at node {bad}", step=bad, iteration=1)
    k = 1
    while True:
        resid = v_obs - v
        res = l2_norm(resid, dt)

        if k > iterates.shape[0]:
            grow = min(max_it, 2 * iterates.shape[0])
            iterates = np.resize(iterates, (grow, 3))
            residuals = np.resize(residuals, grow)
            if errors is not None:
                errors = np.resize(errors, grow)
        iterates[k - 1] = x
        residuals[k - 1] = res
        if errors is not None:
            errors[k - 1] = percent_error(truth.values, x)

        if rule.delta > 0 and res <= threshold:
            reason = "discrepancy"
            break
        if res <= rule.residual_floor:
            reason = "residual_floor"
            break
        if k >= max_it:
            reason = "max_iterations"
            break

        g_arr, e_arr = (x, fixed) if unknown_is_g else (fixed, x)
        bad = _kernels.adjoint_sweep(v, m, n, h, resid, trap, packed, g_arr, e_arr, dt,
                                     u, p, q, r)
        if bad >= 0:
            raise DivergenceError(f"adjoint solve diverged at node {bad}", step=bad, iteration=k)
        wu = grad_w * u
        if unknown_is_g:
            grad = _conductance_terms(v, m, n, h, wu, consts, fixed)
        else:
            grad = _exponent_terms(v, m, n, h, wu, consts, fixed, x)
        try:
            w = step_size(res, grad)
        except ZeroGradientError:
            reason = "zero_gradient"
            break
        grad = np.asarray(grad)
        armijo = 2 * sufficient_decrease * float(grad @ grad)
        for _ in range(max_halvings + 1 if safeguard else 1):
            x_new = x + w * grad
            if not np.all(np.isfinite(x_new)):
                raise DivergenceError(f"Landweber update produced {x_new}", step=None,
                                      iteration=k)
            bad = forward(x_new)
            if bad < 0 and not safeguard:
                break
            if bad < 0:
                new_res = l2_norm(v_obs - v, dt)
                # plain test when c == 0 so ties resolve exactly as in the unsquared norm
                if (new_res <= res if armijo == 0 else new_res ** 2 <= res * res - armijo * w):
                    break
            w *= 0.5
        else:
            if bad >= 0:
                raise DivergenceError(f"forward solve diverged at node {bad}", step=bad,
                                      iteration=k + 1)
            reason = "stalled"
            break
        x = x_new
        steps.append(w)
        if k % 10000 == 0:
            log.info("iteration %d: residual %.6g (target %.6g)", k, res, threshold)
        k += 1

    return RunResult(
        kind=guess.kind,
        iterates=iterates[:k].copy(),
        residuals=residuals[:k].copy(),
        errors=None if errors is None else errors[:k].copy(),
        stop_reason=reason,
        step_sizes=np.array(steps),
        tau=rule.tau,
        delta=rule.delta,
    )
