"""Parameter identification for the space-clamped Hodgkin-Huxley model.

Recovers either the maximal conductances or the gating exponents from a
noisy membrane-potential trace with an adjoint-based Landweber iteration
stopped by the discrepancy principle.
"""
from .errors import (ConfigError, ContractError, DivergenceError, DomainError, HHError,
                     ZeroGradientError)
from .model import (Conductances, Exponents, ModelConstants, TimeGrid, Trajectory,
                    gating_steady_state, ionic_currents, rate_alpha, rate_alpha_prime,
                    rate_beta, rate_beta_prime, solve_forward)
from .data import (NoiseSpec, Observation, add_noise, l2_norm, percent_error,
                   residual_norm)
from .adjoint import (AdjointTrajectory, ResidualSignal, solve_adjoint_conductances,
                      solve_adjoint_exponents)
from .landweber import (IterationRecord, ParameterVector, RunResult, StoppingRule,
                        gradient_conductances, gradient_exponents, landweber_step,
                        run_inversion, step_size)

__version__ = "0.1.0"
