"""Exception hierarchy shared by the library and the CLI."""


class AlohaCorrError(Exception):
    """Base class for all package errors."""


class DivergenceError(AlohaCorrError, ValueError):
    """An integral over the plane diverges (singular path loss near the origin)."""


class NonConvergenceError(AlohaCorrError, ArithmeticError):
    """Adaptive quadrature ran out of budget before reaching its tolerance.

    The best estimate is kept on ``result`` so callers can report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ConfigurationError(AlohaCorrError, ValueError):
    """A simulation plan or CLI configuration cannot be realised."""


class StatisticalError(AlohaCorrError, ValueError):
    """An estimator is undefined for the given sample (too few draws, zero variance)."""


class SimulationError(AlohaCorrError, RuntimeError):
    """A probability-zero event occurred during sampling (e.g. a node on a receiver)."""
