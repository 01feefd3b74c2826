"""Synthetic observations, discrete L2 norms and error metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError
from .model import TimeGrid

GENERATOR_NAME = "numpy.random.PCG64"


def l2_norm(signal, dt: float) -> float:
    """Composite-trapezoid L2(0, T) norm of samples taken every ``dt``."""
    s = np.asarray(signal, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ContractError("signal must be a non-empty 1-d sequence")
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if s.size == 1:
        return 0.0
    sq = s * s
    return math.sqrt(dt * (sq.sum() - 0.5 * (sq[0] + sq[-1])))


@dataclass(frozen=True)
class NoiseSpec:
    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise DomainError(f"epsilon must be a finite number >= 0, got {self.epsilon!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must fit in an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True, eq=False)
class Observation:
    """Noisy voltage samples with the L2 bound ``delta`` on the noise."""

    grid: TimeGrid
    v_delta: np.ndarray
    delta: float
    epsilon: float = float("nan")
    seed: int | None = None
    generator: str | None = None

    def __post_init__(self):
        arr = np.array(self.v_delta, dtype=float)
        if arr.shape != (self.grid.n_nodes,):
            raise ContractError(
                f"observation has {arr.shape} samples, grid expects ({self.grid.n_nodes},)")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise DomainError(f"delta must be finite and >= 0, got {self.delta!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "v_delta", arr)


def add_noise(clean, spec: NoiseSpec, grid: TimeGrid) -> Observation:
    """Multiply every sample by ``1 + u`` with ``u ~ U[-epsilon, epsilon]``.

    The noise level is ``delta = epsilon * ||clean||``, which bounds
    ``||clean - v_delta||`` because the bound holds pointwise.
    """
    clean = np.asarray(clean, dtype=float)
    if clean.shape != (grid.n_nodes,):
        raise ContractError(f"clean signal has shape {clean.shape}, grid expects ({grid.n_nodes},)")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    factor = rng.uniform(-spec.epsilon, spec.epsilon, size=clean.shape)
    v_delta = clean + clean * factor
    delta = spec.epsilon * l2_norm(clean, grid.dt)
    return Observation(grid, v_delta, delta, epsilon=spec.epsilon,
                       seed=int(spec.seed), generator=GENERATOR_NAME)


def residual_norm(observation: Observation, simulated, grid: TimeGrid | None = None) -> float:
    """``||v_delta - simulated||`` in the discrete L2 norm."""
    simulated = np.asarray(getattr(simulated, "v", simulated), dtype=float)
    if grid is not None and not grid.compatible(observation.grid):
        raise ContractError("simulation and observation live on different grids")
    if simulated.shape != observation.v_delta.shape:
        raise ContractError(
            f"simulated trace has {simulated.shape} samples, observation has "
            f"{observation.v_delta.shape}")
    return l2_norm(observation.v_delta - simulated, observation.grid.dt)


def percent_error(truth, iterate) -> float:
    """``100 * ||truth - iterate|| / ||truth||`` with Euclidean norms."""
    kind_t = getattr(truth, "kind", None)
    kind_i = getattr(iterate, "kind", None)
    if kind_t is not None and kind_i is not None and kind_t != kind_i:
        raise ContractError(f"cannot compare {kind_t} with {kind_i}")
    t = np.asarray(getattr(truth, "values", truth), dtype=float)
    x = np.asarray(getattr(iterate, "values", iterate), dtype=float)
    ref = np.linalg.norm(t)
    if ref == 0:
        raise DomainError("percent error is undefined for a zero reference vector")
    return 100.0 * float(np.linalg.norm(t - x)) / float(ref)
