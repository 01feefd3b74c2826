"""Exception types raised by the library and mapped to CLI exit codes."""


class HHError(Exception):
    """Base class for every error raised by :mod:`hhinverse`."""


class DomainError(HHError, ValueError):
    """An input lies outside the domain of a formula (non-finite voltage,
    real power of a non-positive base, zero-norm reference vector)."""


class ContractError(HHError, ValueError):
    """Arguments are individually valid but inconsistent with each other,
    e.g. signals sampled on different time grids."""


class DivergenceError(HHError, ArithmeticError):
    """A time sweep produced a non-finite value.

    Attributes
    ----------
    step : int
        Index of the first grid node holding a non-finite value.
    iteration : int or None
        Landweber iteration during which it happened, when known.
    """

    def __init__(self, message, step, iteration=None):
        super().__init__(message)
        self.step = step
        self.iteration = iteration

    def __str__(self):
        msg = super().__str__()
        if self.iteration is not None:
            msg += f" (iteration {self.iteration})"
        return msg


class ZeroGradientError(HHError, ArithmeticError):
    """The adjoint gradient vanished while the residual did not, so the
    Landweber step size is undefined."""


class ConfigError(HHError, ValueError):
    """An experiment configuration failed validation."""
