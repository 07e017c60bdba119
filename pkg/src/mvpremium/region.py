"""Sampling the dynamic risky region and bond/risky combination regions.

Nobody has a closed form for the dynamic risky region, so these samplers
give an inner approximation built from strategy families. The separation
check is one-sided and stays valid on any such subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .frontier import DiagramPoint, frontier_slope
from .market import ValidatedMarket
from .simulate import (
    SimConfig,
    estimate_terminal_stats,
    lognormal_mix_stats,
    simulate_wealth,
)
from .strategies import (
    AlphaSpec,
    Combination,
    ConstantAlpha,
    ConstantMix,
    Strategy,
    ThresholdMix,
    TimeVaryingMix,
)

FAMILIES = ("constant", "time-varying", "threshold")
DEFAULT_ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)


@dataclass
class RegionSample:
    points: list
    risk_free_return: float
    slope: float
    metadata: dict = field(default_factory=dict)

    @property
    def frontier(self):
        return self.risk_free_return, self.slope


@dataclass(frozen=True)
class SeparationReport:
    slope: float
    confidence_k: float
    n_points: int
    n_excluded: int
    max_sharpe: float
    gap: float
    flags: int
    flagged: tuple = ()

    @property
    def passed(self) -> bool:
        return self.flags == 0

    def as_dict(self) -> dict:
        return {
            "slope": self.slope, "confidence_k": self.confidence_k,
            "n_points": self.n_points, "n_excluded": self.n_excluded,
            "max_sharpe": self.max_sharpe, "gap": self.gap, "flags": self.flags,
            "flagged": list(self.flagged),
        }


def point_sharpe(point: DiagramPoint, risk_free_return: float):
    """Sharpe ratio and its delta-method standard error, or (nan, nan) if riskless."""
    if point.std_return <= 0:
        return float("nan"), float("nan")
    s = (point.mean_return - risk_free_return) / point.std_return
    se = math.hypot(point.se_mean, s * point.se_std) / point.std_return
    return s, se


def sample_weights(m: int, seed: int, index: int, w_max: float = 5.0) -> np.ndarray:
    """Weights on the hyperplane sum(w) = 1 with every |w_i| <= w_max.

    Rejection sampling; attempt ``j`` of draw ``index`` reads counter slot
    ``(index, j)`` so the result is a pure function of its arguments.
    """
    if m == 1:
        return np.ones(1)
    for attempt in range(10_000):
        u = rng.uniforms(seed, rng.SAMPLER, index, attempt, 1, m - 1)[0]
        head = w_max * (2.0 * u - 1.0)
        last = 1.0 - head.sum()
        if abs(last) <= w_max:
            return np.append(head, last)
    raise RuntimeError("weight sampler failed to land inside the box")


def _sample_strategy(market, x0, seed, i, w_max, n_phases=4) -> Strategy:
    m = market.n_assets
    family = FAMILIES[i % len(FAMILIES)]
    draw = lambda j: sample_weights(m, seed, 4 * i + j, w_max)
    if family == "constant":
        return ConstantMix(draw(0))
    if family == "time-varying":
        bp = np.linspace(0.0, market.horizon, n_phases + 1)
        return TimeVaryingMix(bp, np.array([sample_weights(m, seed, 4 * i + j, w_max)
                                            for j in range(n_phases)]))
    u = rng.uniforms(seed, rng.SAMPLER, 4 * i + 3, 10_000, 1)[0, 0]
    barrier = x0 * math.exp(0.3 * (u - 0.5))
    return ThresholdMix(barrier, draw(1), draw(2))


def _is_constant(strategy):
    if isinstance(strategy, ConstantMix):
        return strategy.weights
    if isinstance(strategy, TimeVaryingMix) and np.all(strategy.weights == strategy.weights[0]):
        return strategy.weights[0]
    if isinstance(strategy, ThresholdMix) and np.array_equal(strategy.below, strategy.above):
        return strategy.below
    return None


def strategy_point(market: ValidatedMarket, x0: float, strategy: Strategy,
                   cfg: SimConfig, closed_form: bool = True) -> DiagramPoint:
    """Diagram point of a strategy: lognormal closed form when it is a constant
    pure-risky mix (and ``closed_form``), Monte Carlo otherwise."""
    w = _is_constant(strategy) if closed_form else None
    if w is not None:
        mean, std = lognormal_mix_stats(market, w)
        return DiagramPoint(std, mean, label=strategy.label)
    stats = estimate_terminal_stats(simulate_wealth(market, x0, strategy, cfg), x0)
    return DiagramPoint(stats.std_return, stats.mean_return, stats.se_std, stats.se_mean,
                        label=strategy.label)


def sample_risky_region(market: ValidatedMarket, x0: float, n_strategies: int,
                        cfg: SimConfig, w_max: float = 5.0) -> RegionSample:
    """Points of ``n_strategies`` pure-risky strategies cycling through the
    constant, time-varying and threshold families."""
    if n_strategies < 1:
        raise ValueError("n_strategies must be at least 1")
    points = []
    for i in range(n_strategies):
        strategy = _sample_strategy(market, x0, cfg.seed, i, w_max)
        sub = SimConfig(cfg.n_paths, cfg.n_steps, rng.child_seed(cfg.seed, i), "euler",
                        cfg.workers)
        points.append(strategy_point(market, x0, strategy, sub))
    return RegionSample(
        points, market.risk_free_return(), frontier_slope(market),
        {"sampler": "risky", "n_strategies": n_strategies, "w_max": w_max,
         "families": list(FAMILIES), **cfg.as_dict()},
    )


def sample_combination_region(market: ValidatedMarket, x0: float, risky: Strategy,
                              alpha_specs: list[AlphaSpec], cfg: SimConfig,
                              alpha_grid=DEFAULT_ALPHA_GRID) -> RegionSample:
    """Points of ``alpha(t) * pi(t)`` for a constant-alpha grid and the given
    (possibly wealth-dependent or random) mixing processes.

    Every combination runs on the same seed, so all points share Brownian paths.
    """
    if not getattr(risky, "pure_risky", False):
        raise ValueError(f"{risky.label} is not a pure-risky strategy")
    specs = [ConstantAlpha(a) for a in alpha_grid] + list(alpha_specs)
    points = []
    for spec in specs:
        strategy = Combination(risky, spec)
        sub = SimConfig(cfg.n_paths, cfg.n_steps, cfg.seed, "euler", cfg.workers)
        points.append(strategy_point(market, x0, strategy, sub))
    return RegionSample(
        points, market.risk_free_return(), frontier_slope(market),
        {"sampler": "combination", "risky": risky.label, "alpha_grid": list(alpha_grid),
         **cfg.as_dict()},
    )


def check_separation(sample: RegionSample, confidence_k: float = 3.0) -> SeparationReport:
    """Flag points whose Sharpe ratio plus ``k`` standard errors exceeds the slope."""
    if not sample.points:
        raise ValueError("empty region sample")
    best, flagged, excluded = -math.inf, [], 0
    for p in sample.points:
        s, se = point_sharpe(p, sample.risk_free_return)
        if math.isnan(s):
            excluded += 1
            continue
        best = max(best, s)
        if s + confidence_k * se > sample.slope:
            flagged.append(p.label)
    best = best if best > -math.inf else float("nan")
    return SeparationReport(
        slope=sample.slope, confidence_k=confidence_k, n_points=len(sample.points),
        n_excluded=excluded, max_sharpe=best, gap=sample.slope - best,
        flags=len(flagged), flagged=tuple(flagged),
    )
