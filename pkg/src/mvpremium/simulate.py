"""Monte Carlo wealth simulation.

Two schemes:

* ``euler``: Euler-Maruyama on the discounted wealth (bond growth is applied
  exactly), for any feedback strategy.
* ``exact``: the efficient wealth written as ``x*(t) = y(t) + gamma e^{-int_t^T r}``
  where ``y`` is a geometric Brownian motion; sampled without discretisation
  error on the grid.

Both draw Brownian increments from the same counter-based stream, so on a
shared grid the two schemes see identical noise path by path.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import frontier, rng
from .errors import DegenerateEnsemble, NumericalBlowup, SchemeMismatch, BadParams
from .market import ValidatedMarket
from .strategies import Efficient, SimContext, StepData, Strategy, advance

BLOWUP_FACTOR = 1e12
CAP_RTOL = 1e-9
CHUNK = 8192


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 10_000
    n_steps: int = 250
    seed: int = 0
    scheme: str = "euler"
    workers: int = 1
    store_paths: bool = False

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 1:
            raise BadParams("n_paths and n_steps must be at least 1")
        if self.scheme not in ("euler", "exact"):
            raise BadParams(f"unknown scheme {self.scheme!r}")
        if self.workers < 1:
            raise BadParams("workers must be at least 1")

    def as_dict(self) -> dict:
        return {"n_paths": self.n_paths, "n_steps": self.n_steps, "seed": self.seed,
                "scheme": self.scheme}


@dataclass(eq=False)
class PathEnsemble:
    terminal_wealth: np.ndarray
    grid: np.ndarray
    seed: int
    scheme: str
    label: str
    risk_free_return: float
    # cap statistics, efficient runs only; counted over (path, step) pairs
    gamma: float | None = None
    cap_violations: int = 0
    cap_gap_max: float = float("nan")
    cap_gap_min: float = float("nan")
    paths: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_paths(self) -> int:
        return self.terminal_wealth.size

    @property
    def n_steps(self) -> int:
        return self.grid.size - 1

    @property
    def violation_fraction(self) -> float:
        return self.cap_violations / (self.n_paths * self.n_steps)

    def summary(self) -> dict:
        out = {
            "label": self.label,
            "scheme": self.scheme,
            "seed": self.seed,
            "n_paths": self.n_paths,
            "n_steps": self.n_steps,
        }
        if self.gamma is not None:
            out.update(gamma=self.gamma, cap_violations=self.cap_violations,
                       violation_fraction=self.violation_fraction,
                       cap_gap_max=self.cap_gap_max)
        return out


@dataclass(frozen=True)
class TerminalStats:
    mean_return: float
    std_return: float
    sharpe: float  # nan when the ensemble is riskless
    se_mean: float
    se_std: float
    n: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("mean_return", "std_return", "sharpe", "se_mean", "se_std", "n")}


def time_grid(market: ValidatedMarket, n_steps: int) -> np.ndarray:
    """Uniform grid of ``n_steps`` on [0, T] with the curve breakpoints merged in."""
    uniform = np.linspace(0.0, market.horizon, n_steps + 1)
    grid = np.union1d(uniform, market.breakpoints)
    # drop near-duplicates created by rounding in linspace
    keep = np.concatenate([[True], np.diff(grid) > 1e-12 * market.horizon])
    grid = grid[keep]
    grid[-1] = market.horizon
    return grid


def _steps(market, grid):
    for k in range(grid.size - 1):
        t, h = grid[k], grid[k + 1] - grid[k]
        i = int(market.interval(t))
        yield k, t, h, i


def _chunks(n_paths):
    return [(s, min(CHUNK, n_paths - s)) for s in range(0, n_paths, CHUNK)]


def _run_chunks(fn, cfg):
    chunks = _chunks(cfg.n_paths)
    if cfg.workers == 1 or len(chunks) == 1:
        return [fn(s, n) for s, n in chunks]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def _check_blowup(x, x0, k, path_start):
    bad = ~np.isfinite(x) | (np.abs(x) > BLOWUP_FACTOR * x0)
    if bad.any():
        j = int(np.argmax(bad))
        raise NumericalBlowup(step=k + 1, path=path_start + j, value=float(x[j]))


def _euler_chunk(market, x0, strategy, cfg, grid, path_start, n, cap_info):
    m = market.n_assets
    ctx = SimContext(market, x0, cfg.seed, path_start, n, grid)
    state = strategy.start(ctx)
    x = np.full(n, float(x0))
    paths = np.empty((n, grid.size)) if cfg.store_paths else None
    if paths is not None:
        paths[:, 0] = x
    violations, gap_max = 0, -np.inf
    for k, t, h, i in _steps(market, grid):
        pi = strategy.allocate(ctx, k, t, x, state)
        dW = math.sqrt(h) * rng.normals(cfg.seed, rng.BROWNIAN, k, path_start, n, m)
        step = StepData(k, t, h, i, math.exp(market.rate[i] * h), market.excess[i],
                        market.sigma[i], dW)
        x_next = advance(x, pi, step)
        _check_blowup(x_next, x0, k, path_start)
        strategy.after_step(ctx, step, x_next, state)
        x = x_next
        if paths is not None:
            paths[:, k + 1] = x
        if cap_info is not None:
            g, caps = cap_info
            gap = x - caps[k + 1]
            violations += int(np.count_nonzero(gap > CAP_RTOL * g))
            gap_max = max(gap_max, float(gap.max()))
    return x, violations, gap_max, paths


def simulate_wealth(market: ValidatedMarket, x0: float, strategy: Strategy,
                    cfg: SimConfig) -> PathEnsemble:
    """Simulate terminal wealth under a feedback strategy.

    ``cfg.scheme == "exact"`` is delegated to :func:`exact_efficient_paths`
    and is only defined for :class:`Efficient`.
    """
    if cfg.scheme == "exact":
        if not isinstance(strategy, Efficient):
            raise SchemeMismatch(f"exact scheme needs the efficient strategy, got {strategy.label}")
        return exact_efficient_paths(market, x0, strategy.z, cfg)
    if not x0 > 0:
        raise BadParams("initial wealth must be positive")
    strategy.check(market)
    grid = time_grid(market, cfg.n_steps)
    cap_info = None
    g = None
    if isinstance(strategy, Efficient):
        g = frontier.gamma(market, x0, strategy.z)
        cap_info = (g, g * market.discount(grid))

    results = _run_chunks(
        lambda s, n: _euler_chunk(market, x0, strategy, cfg, grid, s, n, cap_info), cfg)
    ens = PathEnsemble(
        terminal_wealth=np.concatenate([r[0] for r in results]),
        grid=grid, seed=cfg.seed, scheme="euler", label=strategy.label,
        risk_free_return=market.risk_free_return(), gamma=g,
        paths=np.concatenate([r[3] for r in results]) if cfg.store_paths else None,
    )
    if g is not None:
        ens.cap_violations = sum(r[1] for r in results)
        ens.cap_gap_max = max(r[2] for r in results)
    return ens


def _exact_chunk(market, cfg, grid, y0, caps, g, path_start, n):
    m = market.n_assets
    log_y = np.zeros(n)
    keep = np.empty((n, grid.size)) if cfg.store_paths else None
    if keep is not None:
        keep[:, 0] = y0 + caps[0]
    violations, gap_max, gap_min = 0, -np.inf, np.inf
    for k, t, h, i in _steps(market, grid):
        z = rng.normals(cfg.seed, rng.BROWNIAN, k, path_start, n, m)
        # int theta dW over the step is N(0, |theta|^2 h) and equals theta . dW
        stoch = math.sqrt(h) * (z @ market.theta[i])
        log_y += (market.rate[i] - 1.5 * market.theta2[i]) * h - stoch
        y = y0 * np.exp(log_y)
        x = y + caps[k + 1]
        if keep is not None:
            keep[:, k + 1] = x
        violations += int(np.count_nonzero(x - caps[k + 1] > CAP_RTOL * g))
        gap_max = max(gap_max, float(y.max()))
        gap_min = min(gap_min, float(y.min()))
    return x, violations, (gap_max, gap_min), keep


def exact_efficient_paths(market: ValidatedMarket, x0: float, z: float,
                          cfg: SimConfig) -> PathEnsemble:
    """Efficient wealth from the closed-form solution of the gap process ``y``.

    ``y(0) <= 0`` and ``y`` stays on one side of zero, so the wealth never
    exceeds the discounted cap; ``cap_gap_max`` is the largest ``y`` seen.
    """
    g = frontier.gamma(market, x0, z)
    T = market.horizon
    int_r = market.integrate("rate", 0.0, T)
    int_th = market.integrate("theta2", 0.0, T)
    y0 = (x0 - z * math.exp(-int_r)) / -math.expm1(-int_th)
    grid = time_grid(market, cfg.n_steps)
    caps = g * market.discount(grid)
    results = _run_chunks(lambda s, n: _exact_chunk(market, cfg, grid, y0, caps, g, s, n), cfg)
    return PathEnsemble(
        terminal_wealth=np.concatenate([r[0] for r in results]),
        grid=grid, seed=cfg.seed, scheme="exact", label=f"efficient z={z:.6g}",
        risk_free_return=market.risk_free_return(), gamma=g,
        cap_violations=sum(r[1] for r in results),
        cap_gap_max=max(r[2][0] for r in results),
        cap_gap_min=min(r[2][1] for r in results),
        paths=np.concatenate([r[3] for r in results]) if cfg.store_paths else None,
    )


def estimate_terminal_stats(ensemble: PathEnsemble, x0: float) -> TerminalStats:
    """Sample statistics of the terminal return ``(x(T) - x0) / x0``."""
    n = ensemble.n_paths
    if n < 2:
        raise DegenerateEnsemble("need at least two paths for sample statistics")
    ret = (ensemble.terminal_wealth - x0) / x0
    mean = float(ret.mean())
    # identical samples can still give a rounding-level std; report exactly 0
    std = float(ret.std(ddof=1)) if np.ptp(ret) > 0 else 0.0
    sharpe = (mean - ensemble.risk_free_return) / std if std > 0 else float("nan")
    return TerminalStats(
        mean_return=mean,
        std_return=std,
        sharpe=sharpe,
        se_mean=std / math.sqrt(n),
        se_std=std / math.sqrt(2 * (n - 1)),
        n=n,
    )


def lognormal_mix_stats(market: ValidatedMarket, weights):
    """Closed-form terminal return mean and std of a constant pure-risky mix.

    log x(T) is normal with drift ``int (w'mu - |sigma'w|^2/2)`` and variance
    ``int |sigma'w|^2``.
    """
    w = np.asarray(weights, dtype=float)
    widths = np.diff(market.breakpoints)
    drift = float((market.mu @ w) @ widths)
    vol = np.einsum("kij,i->kj", market.sigma, w)
    var = float(np.einsum("kj,kj->k", vol, vol) @ widths)
    growth = math.exp(drift)
    return growth - 1.0, growth * math.sqrt(math.expm1(var))
