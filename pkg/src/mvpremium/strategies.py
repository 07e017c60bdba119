"""Feedback strategies and bond/risky mixing processes.

A strategy maps the current time and wealth of a block of paths to the money
held in each stock. Anything that must persist between steps (the reference
wealth of a combination, a regime index) lives in a per-block state object,
so strategy instances themselves are immutable and shareable across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import frontier, rng
from .errors import BadParams

WEIGHT_SUM_TOL = 1e-12


@dataclass
class SimContext:
    market: object
    x0: float
    seed: int
    path_start: int
    n_paths: int
    grid: np.ndarray


@dataclass
class StepData:
    """Everything known about one grid step ``[grid[k], grid[k+1]]``."""

    k: int
    t: float
    h: float
    interval: int
    growth: float        # exp(r h)
    excess: np.ndarray   # B on this step
    sigma: np.ndarray
    dW: np.ndarray       # (n, m)


def advance(x: np.ndarray, pi: np.ndarray, step: StepData) -> np.ndarray:
    """One Euler-Maruyama step of the discounted wealth, re-accrued at the bond rate."""
    noise = np.einsum("nj,nj->n", pi @ step.sigma, step.dW)
    return step.growth * (x + (pi @ step.excess) * step.h + noise)


def _as_weights(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if abs(w.sum(axis=-1) - 1.0).max() > WEIGHT_SUM_TOL:
        raise BadParams(f"pure-risky weights must sum to 1, got {w.sum(axis=-1)}")
    w.setflags(write=False)
    return w


def _piecewise(breakpoints, values, t):
    idx = np.searchsorted(breakpoints, t, side="right") - 1
    return values[int(np.clip(idx, 0, len(values) - 1))]


class Strategy:
    """Base class. Subclasses override :meth:`allocate` and, if stateful,
    :meth:`start` and :meth:`after_step`."""

    pure_risky = False

    def start(self, ctx: SimContext):
        return None

    def allocate(self, ctx: SimContext, k: int, t: float, x: np.ndarray, state) -> np.ndarray:
        raise NotImplementedError

    def after_step(self, ctx: SimContext, step: StepData, x_next: np.ndarray, state):
        pass

    def check(self, market):
        pass

    @property
    def label(self) -> str:
        return type(self).__name__


@dataclass(frozen=True, eq=False)
class Efficient(Strategy):
    """Mean-variance efficient feedback rule for terminal target ``z``."""

    z: float

    def start(self, ctx):
        return frontier.gamma(ctx.market, ctx.x0, self.z)

    def allocate(self, ctx, k, t, x, g):
        market = ctx.market
        return -np.outer(x - g * market.discount(t), market.mv_direction[market.interval(t)])

    @property
    def label(self):
        return f"efficient z={self.z:.6g}"


@dataclass(frozen=True, eq=False)
class ConstantMix(Strategy):
    """Pure-risky constant proportions: pi(t) = w x(t) with sum(w) = 1."""

    weights: np.ndarray
    pure_risky = True

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_weights(self.weights))

    def check(self, market):
        if self.weights.shape != (market.n_assets,):
            raise BadParams(f"need {market.n_assets} weights, got {self.weights.shape}")

    def allocate(self, ctx, k, t, x, state):
        return np.outer(x, self.weights)

    @property
    def label(self):
        return "constant-mix w=(" + ",".join(f"{v:.4g}" for v in self.weights) + ")"


@dataclass(frozen=True, eq=False)
class TimeVaryingMix(Strategy):
    """Pure-risky proportions that follow a deterministic piecewise-constant schedule."""

    breakpoints: np.ndarray
    weights: np.ndarray  # (intervals, m)
    pure_risky = True

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        w = _as_weights(self.weights)
        if w.ndim != 2 or w.shape[0] != bp.size - 1:
            raise BadParams("one weight row per schedule interval required")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "weights", w)

    def check(self, market):
        if self.weights.shape[1] != market.n_assets:
            raise BadParams("weight rows do not match the number of stocks")

    def allocate(self, ctx, k, t, x, state):
        return np.outer(x, _piecewise(self.breakpoints, self.weights, t))

    @property
    def label(self):
        return f"time-varying mix ({self.weights.shape[0]} phases)"


@dataclass(frozen=True, eq=False)
class ThresholdMix(Strategy):
    """Pure-risky: proportions ``below`` while wealth < barrier, else ``above``."""

    barrier: float
    below: np.ndarray
    above: np.ndarray
    pure_risky = True

    def __post_init__(self):
        object.__setattr__(self, "below", _as_weights(self.below))
        object.__setattr__(self, "above", _as_weights(self.above))

    def check(self, market):
        if self.below.shape != (market.n_assets,) or self.above.shape != (market.n_assets,):
            raise BadParams("threshold weights do not match the number of stocks")

    def allocate(self, ctx, k, t, x, state):
        w = np.where((x < self.barrier)[:, None], self.below, self.above)
        return w * x[:, None]

    @property
    def label(self):
        return f"threshold mix barrier={self.barrier:.4g}"


@dataclass(frozen=True, eq=False)
class CustomFeedback(Strategy):
    """Arbitrary vectorised rule ``(t, x[n]) -> pi[n, m]``. Admissibility is assumed."""

    rule: Callable
    name: str = "custom"

    def allocate(self, ctx, k, t, x, state):
        pi = np.asarray(self.rule(t, x), dtype=float)
        return np.broadcast_to(pi, (x.size, pi.shape[-1])) if pi.ndim < 2 else pi

    @property
    def label(self):
        return self.name


# -- mixing processes ---------------------------------------------------------

class AlphaSpec:
    """Weight on the risky strategy; the bond holds the remainder."""

    def start(self, ctx):
        return None

    def value(self, ctx, k, t, x, state) -> np.ndarray:
        raise NotImplementedError

    def after_step(self, ctx, step, state):
        pass


@dataclass(frozen=True)
class ConstantAlpha(AlphaSpec):
    a: float

    def value(self, ctx, k, t, x, state):
        return np.full(x.shape, self.a)

    @property
    def label(self):
        return f"alpha={self.a:.4g}"


@dataclass(frozen=True, eq=False)
class DeterministicAlpha(AlphaSpec):
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", np.asarray(self.breakpoints, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def value(self, ctx, k, t, x, state):
        return np.full(x.shape, _piecewise(self.breakpoints, self.values, t))

    @property
    def label(self):
        return "alpha schedule(" + ",".join(f"{v:.3g}" for v in self.values) + ")"


@dataclass(frozen=True)
class ThresholdAlpha(AlphaSpec):
    """``high`` while the combined wealth is below ``barrier``, ``low`` above it."""

    barrier: float
    high: float
    low: float

    def value(self, ctx, k, t, x, state):
        return np.where(x < self.barrier, self.high, self.low)

    @property
    def label(self):
        return f"alpha threshold b={self.barrier:.4g} {self.high:.3g}/{self.low:.3g}"


@dataclass(frozen=True, eq=False)
class RandomSwitchAlpha(AlphaSpec):
    """Cycles through ``levels``, jumping at the arrivals of a Poisson clock."""

    intensity: float
    levels: tuple

    def __post_init__(self):
        if self.intensity < 0 or len(self.levels) < 1:
            raise BadParams("need intensity >= 0 and at least one level")
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))

    def start(self, ctx):
        return {"regime": np.zeros(ctx.n_paths, dtype=np.int64)}

    def value(self, ctx, k, t, x, state):
        return np.asarray(self.levels)[state["regime"]]

    def after_step(self, ctx, step, state):
        u = rng.uniforms(ctx.seed, rng.REGIME, step.k, ctx.path_start, ctx.n_paths)[:, 0]
        jump = u < -np.expm1(-self.intensity * step.h)
        state["regime"] = (state["regime"] + jump) % len(self.levels)

    @property
    def label(self):
        return f"alpha switch lambda={self.intensity:.3g}"


@dataclass(frozen=True, eq=False)
class Combination(Strategy):
    """``alpha(t) * pi(t)``: a dynamic mix of the bond and a risky strategy.

    ``pi`` is the risky strategy's allocation along its own wealth path, which
    is simulated alongside on the same Brownian increments. With constant
    alpha the combined wealth is ``alpha x + (1 - alpha) x0 e^{int r}``.
    """

    base: Strategy
    alpha: AlphaSpec

    @dataclass
    class _State:
        base_x: np.ndarray
        base_state: object
        alpha_state: object
        base_pi: np.ndarray = field(default=None)

    def check(self, market):
        self.base.check(market)

    def start(self, ctx):
        return self._State(np.full(ctx.n_paths, float(ctx.x0)), self.base.start(ctx),
                           self.alpha.start(ctx))

    def allocate(self, ctx, k, t, x, state):
        state.base_pi = self.base.allocate(ctx, k, t, state.base_x, state.base_state)
        return self.alpha.value(ctx, k, t, x, state.alpha_state)[:, None] * state.base_pi

    def after_step(self, ctx, step, x_next, state):
        state.base_x = advance(state.base_x, state.base_pi, step)
        self.base.after_step(ctx, step, state.base_x, state.base_state)
        self.alpha.after_step(ctx, step, state.alpha_state)

    @property
    def label(self):
        return f"{self.base.label} | {getattr(self.alpha, 'label', type(self.alpha).__name__)}"
