"""Closed-form efficient frontier, feedback policy and the Black-Scholes checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, Infeasible, TargetBelowRiskFree
from .market import ValidatedMarket

THETA2_FLOOR = 1e-12
LEMMA_SLACK = 1e-12


@dataclass(frozen=True)
class DiagramPoint:
    """A (std, mean) point of terminal return on the mean-std diagram."""

    std_return: float
    mean_return: float
    se_std: float = 0.0
    se_mean: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.std_return < 0 or self.se_std < 0 or self.se_mean < 0:
            raise BadParams(f"negative std or standard error in {self!r}")


@dataclass(frozen=True)
class EfficientSolution:
    target: float
    gamma: float
    variance: float
    std_return: float
    mean_return: float
    slope: float
    risk_free_return: float


@dataclass(frozen=True, eq=False)
class AllocationVector:
    risky: np.ndarray
    bond: float


def _totals(market: ValidatedMarket):
    T = market.horizon
    int_r = market.integrate("rate", 0.0, T)
    int_th = market.integrate("theta2", 0.0, T)
    if int_th < THETA2_FLOOR:
        raise Infeasible(f"integrated squared risk premium {int_th:.3e} is numerically zero")
    return int_r, int_th


def _check_target(market, x0, z):
    if not x0 > 0:
        raise BadParams(f"initial wealth must be positive, got {x0}")
    floor = x0 * np.exp(market.integrate("rate", 0.0, market.horizon))
    if z < floor:
        raise TargetBelowRiskFree(f"target {z} below risk-free payoff {floor:.10g}")
    return floor


def gamma(market: ValidatedMarket, x0: float, z: float) -> float:
    """Terminal wealth cap of the efficient policy for target ``z``."""
    _check_target(market, x0, z)
    int_r, int_th = _totals(market)
    return float((z - x0 * np.exp(int_r - int_th)) / -np.expm1(-int_th))


def min_variance(market: ValidatedMarket, x0: float, z: float) -> float:
    floor = _check_target(market, x0, z)
    _, int_th = _totals(market)
    return float((z - floor) ** 2 / np.expm1(int_th))


def frontier_slope(market: ValidatedMarket) -> float:
    """Sharpe ratio shared by every efficient portfolio."""
    int_th = market.integrate("theta2", 0.0, market.horizon)
    return float(np.sqrt(np.expm1(int_th)))


def efficient_solution(market: ValidatedMarket, x0: float, z: float) -> EfficientSolution:
    var = min_variance(market, x0, z)
    return EfficientSolution(
        target=float(z),
        gamma=gamma(market, x0, z),
        variance=var,
        std_return=float(np.sqrt(var)) / x0,
        mean_return=(z - x0) / x0,
        slope=frontier_slope(market),
        risk_free_return=market.risk_free_return(),
    )


def frontier_points(market: ValidatedMarket, x0: float, z_min: float, z_max: float,
                    count: int) -> list[DiagramPoint]:
    """Efficient points for ``count`` equally spaced targets in [z_min, z_max].

    Means are placed on the frontier line from the standard deviations, so
    collinearity holds to rounding.
    """
    if count < 1:
        raise BadParams("count must be at least 1")
    if z_max < z_min:
        raise BadParams("z_max must not be below z_min")
    _check_target(market, x0, z_min)
    rf = market.risk_free_return()
    slope = frontier_slope(market)
    if count == 1 or z_min == z_max:
        targets = np.array([z_min])
    else:
        targets = np.linspace(z_min, z_max, count)
    points = []
    for z in targets:
        std = float(np.sqrt(min_variance(market, x0, z))) / x0
        points.append(DiagramPoint(std, rf + slope * std, label=f"efficient z={z:.6g}"))
    points.sort(key=lambda p: p.std_return)
    return points


def efficient_allocation(market: ValidatedMarket, x0: float, z: float, t: float,
                         x: float) -> AllocationVector:
    """Money held in each stock (and the bond) by the efficient feedback rule."""
    g = gamma(market, x0, z)
    market._check_time(t)
    i = market.interval(t)
    cap = g * market.discount(t)
    risky = -market.mv_direction[i] * (x - cap)
    return AllocationVector(risky=risky, bond=float(x - risky.sum()))


def stock_stats_bs(mu: float, sigma: float, r: float, T: float):
    """Terminal return mean, std and Sharpe ratio of a Black-Scholes stock."""
    if not sigma > 0 or not T > 0:
        raise BadParams(f"need sigma > 0 and T > 0, got sigma={sigma}, T={T}")
    growth = np.exp(mu * T)
    mean = np.expm1(mu * T)
    std = growth * np.sqrt(np.expm1(sigma * sigma * T))
    sharpe = (mean - np.expm1(r * T)) / std
    return float(mean), float(std), float(sharpe)


def bs_dominance_margin(mu, sigma, r, T):
    """Vectorised margin of frontier slope squared over the stock's Sharpe squared.

    Uses ``(e^{muT}-e^{rT})^2 / (e^{(2mu+s^2)T} - e^{2muT})
    = expm1(-(mu-r)T)^2 / expm1(s^2 T)`` to keep precision near mu = r.
    """
    mu, sigma, r, T = (np.asarray(a, dtype=float) for a in (mu, sigma, r, T))
    with np.errstate(over="ignore"):
        lhs = np.expm1(((mu - r) / sigma) ** 2 * T)
    rhs = np.expm1(-(mu - r) * T) ** 2 / np.expm1(sigma * sigma * T)
    return lhs - rhs


def bs_strict_dominance(mu: float, sigma: float, r: float, T: float):
    if not mu > r:
        raise BadParams(f"dominance needs mu > r, got mu={mu}, r={r}")
    if not sigma > 0 or not T > 0:
        raise BadParams(f"need sigma > 0 and T > 0, got sigma={sigma}, T={T}")
    margin = float(bs_dominance_margin(mu, sigma, r, T))
    return margin > 0, margin


def lemma_a1_margin(b, x):
    """(e^{bx}-1)(e^{b/x}-1) - (e^b-1)^2; non-negative, zero only at x = 1."""
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(b <= 0) or np.any(x <= 0):
        raise BadParams("lemma margin needs b > 0 and x > 0")
    with np.errstate(over="ignore"):
        out = np.expm1(b * x) * np.expm1(b / x) - np.expm1(b) ** 2
    return out if out.ndim else float(out)


def premium(frontier_slope: float, risky_sharpe: float) -> float:
    """Relative Sharpe-ratio gain of the frontier over a risky portfolio."""
    if not risky_sharpe > 0:
        raise BadParams(f"risky Sharpe ratio must be positive, got {risky_sharpe}")
    return frontier_slope / risky_sharpe - 1.0
