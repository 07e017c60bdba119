"""Exception types shared across the package.

Validation problems derive from ``MarketError`` (a ``ValueError``) so callers
can catch them as bad input; ``NumericalBlowup`` is a runtime failure.
"""


class MarketError(ValueError):
    """Base class for invalid inputs."""


class BadHorizon(MarketError):
    pass


class BadDimensions(MarketError):
    pass


class Degenerate(MarketError):
    """Volatility covariance falls below the nondegeneracy floor."""


class Infeasible(MarketError):
    """Every appreciation rate equals the interest rate (no risk premium)."""


class OutOfHorizon(MarketError):
    pass


class ReversedInterval(MarketError):
    pass


class TargetBelowRiskFree(MarketError):
    """Target terminal wealth is below the risk-free payoff."""


class BadParams(MarketError):
    pass


class SchemeMismatch(MarketError):
    """The exact scheme only exists for the efficient strategy."""


class DegenerateEnsemble(MarketError):
    pass


class NumericalBlowup(RuntimeError):
    def __init__(self, step, path, value):
        self.step = step
        self.path = path
        self.value = value
        super().__init__(f"wealth diverged at step {step}, path {path}: {value!r}")


class SelfCheckFailed(RuntimeError):
    pass
