"""Continuous-time mean-variance portfolios and the Sharpe premium of dynamic trading."""

from .market import (
    MarketModel,
    ParameterCurve,
    ValidatedMarket,
    integrate,
    load_market,
    risk_premium,
    save_market,
    validate_market,
)
from .frontier import (
    DiagramPoint,
    efficient_allocation,
    efficient_solution,
    frontier_points,
    frontier_slope,
    gamma,
    min_variance,
)
from .simulate import SimConfig, exact_efficient_paths, estimate_terminal_stats, simulate_wealth

__version__ = "0.1.0"
