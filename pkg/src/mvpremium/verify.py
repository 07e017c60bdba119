"""Numerical checks of the structural properties of efficient portfolios.

Each check returns a :class:`CheckRecord` carrying its own statistic and
threshold; :func:`run_all` assembles them in a fixed order into a
:class:`VerificationReport` whose JSON body is a pure function of the inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import frontier
from .errors import MarketError, NumericalBlowup
from .io import dumps
from .market import MarketModel, ValidatedMarket, validate_market
from .region import check_separation, sample_risky_region
from .simulate import SimConfig, exact_efficient_paths, simulate_wealth
from .strategies import Efficient

BOND_EPS_REL = 1e-9
SEPARATION_K = 3.0


@dataclass
class CheckRecord:
    name: str
    statistic: float
    threshold: float
    passed: bool
    config: dict = field(default_factory=dict)
    seed: int | None = None
    details: dict = field(default_factory=dict)
    skipped: bool = False

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "pass": self.passed,
            "skipped": self.skipped,
            "seed": self.seed,
            "config": self.config,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckRecord":
        return cls(d["name"], d["statistic"], d["threshold"], d["pass"], d.get("config", {}),
                   d.get("seed"), d.get("details", {}), d.get("skipped", False))


@dataclass
class VerificationReport:
    checks: list
    seed: int | None = None
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"checks": [c.as_dict() for c in self.checks], "pass": self.passed,
                "seed": self.seed, "config": self.config}

    def to_json(self) -> str:
        return dumps(self.as_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls([CheckRecord.from_dict(c) for c in d["checks"]], d.get("seed"),
                   d.get("config", {}))


def _at_risk_free(market, x0, z) -> bool:
    floor = x0 * math.exp(market.integrate("rate", 0.0, market.horizon))
    if z < floor * (1 - 1e-14):
        frontier.gamma(market, x0, z)  # raises TargetBelowRiskFree
    return z <= floor * (1 + 1e-14)


def _exact_with_paths(market, x0, z, cfg):
    c = SimConfig(cfg.n_paths, cfg.n_steps, cfg.seed, "exact", cfg.workers, store_paths=True)
    return exact_efficient_paths(market, x0, z, c)


def _allocations(market, ens, k):
    """Risky allocations (n, m) of the efficient rule at grid time k."""
    t = ens.grid[k]
    x = ens.paths[:, k]
    cap = ens.gamma * market.discount(t)
    return -np.outer(x - cap, market.mv_direction[market.interval(t)]), x


def verify_wealth_cap(market: ValidatedMarket, x0: float, z: float, cfg: SimConfig) -> CheckRecord:
    """Efficient wealth never exceeds gamma e^{-int_t^T r}; strictly iff z is above
    the risk-free payoff. Euler violations must not grow when the grid is refined."""
    boundary = _at_risk_free(market, x0, z)
    exact = exact_efficient_paths(market, x0, z, SimConfig(cfg.n_paths, cfg.n_steps, cfg.seed,
                                                          "exact", cfg.workers))
    g = exact.gamma
    tol = 1e-9 * g
    if boundary:
        # y == 0 identically: the cap is attained on every path
        shape_ok = exact.cap_gap_max == 0.0 and exact.cap_gap_min == 0.0
    else:
        shape_ok = exact.cap_gap_max < 0.0
    fractions = []
    for n in (cfg.n_steps, 2 * cfg.n_steps):
        e = simulate_wealth(market, x0, Efficient(z), SimConfig(cfg.n_paths, n, cfg.seed,
                                                               "euler", cfg.workers))
        fractions.append(e.violation_fraction)
    euler_ok = fractions[1] <= fractions[0]
    passed = exact.cap_violations == 0 and shape_ok and euler_ok
    return CheckRecord(
        name=f"wealth_cap z={z:.10g}", statistic=exact.cap_violations, threshold=0,
        passed=passed, config=cfg.as_dict(), seed=cfg.seed,
        details={"gamma": g, "tolerance": tol, "boundary_target": boundary,
                 "max_gap": exact.cap_gap_max, "min_gap": exact.cap_gap_min,
                 "strict_or_equality_ok": shape_ok,
                 "euler_steps": [cfg.n_steps, 2 * cfg.n_steps],
                 "euler_violation_fraction": fractions, "euler_non_increasing": euler_ok},
    )


def verify_risky_exposure(market: ValidatedMarket, x0: float, z: float, cfg: SimConfig,
                          epsilon: float = 0.0) -> CheckRecord:
    """For a non-trivial target every exact path holds stock wherever B(t) != 0."""
    name = f"risky_exposure z={z:.10g}"
    if _at_risk_free(market, x0, z):
        return CheckRecord(name, float("nan"), 1.0, True, cfg.as_dict(), cfg.seed,
                           {"reason": "target equals the risk-free payoff"}, skipped=True)
    ens = _exact_with_paths(market, x0, z, cfg)
    fractions, times = [], []
    for k, t in enumerate(ens.grid):
        if not np.any(market.excess[market.interval(t)] != 0):
            continue
        pi, _ = _allocations(market, ens, k)
        fractions.append(float(np.mean(np.linalg.norm(pi, axis=1) > epsilon)))
        times.append(float(t))
    stat = min(fractions) if fractions else float("nan")
    return CheckRecord(
        name, stat, 1.0, bool(fractions) and stat == 1.0, cfg.as_dict(), cfg.seed,
        {"epsilon": epsilon, "times_checked": len(times),
         "times_skipped": int(ens.grid.size - len(times))},
    )


def verify_bond_allocation(market: ValidatedMarket, x0: float, z: float,
                           cfg: SimConfig) -> CheckRecord:
    """At every grid time in (0, T] some exact path holds a non-zero bond position.

    A Monte Carlo estimate can confirm P{bond != 0} > 0 but cannot refute it.
    """
    _at_risk_free(market, x0, z)
    ens = _exact_with_paths(market, x0, z, cfg)
    eps = BOND_EPS_REL * x0
    fractions = []
    for k in range(1, ens.grid.size):
        pi, x = _allocations(market, ens, k)
        bond = x - pi.sum(axis=1)
        fractions.append(float(np.mean(np.abs(bond) > eps)))
    stat = min(fractions)
    jumps = market.excess_jumps()
    return CheckRecord(
        f"bond_allocation z={z:.10g}", stat, 0.0, stat > 0.0, cfg.as_dict(), cfg.seed,
        {"epsilon": eps, "times_checked": len(fractions),
         "excess_discontinuous": bool(jumps.size),
         "excess_jump_times": jumps.tolist()},
    )


def verify_sharpe_separation(market: ValidatedMarket, x0: float, cfg: SimConfig,
                             n_strategies: int = 200) -> CheckRecord:
    sample = sample_risky_region(market, x0, n_strategies, cfg)
    rep = check_separation(sample, SEPARATION_K)
    return CheckRecord(
        "sharpe_separation", rep.flags, 0, rep.passed, cfg.as_dict(), cfg.seed,
        {"n_strategies": n_strategies, **rep.as_dict()},
    )


@dataclass(frozen=True)
class GridSpec:
    b_values: tuple = tuple(np.linspace(0.1, 5.0, 100))
    x_values: tuple = tuple(np.union1d(np.logspace(-2.0, 1.0, 99), [1.0]))
    n_draws: int = 10_000
    seed: int = 0
    r_max: float = 0.1
    excess_max: float = 0.5
    sigma_max: float = 1.0
    T_max: float = 10.0

    def draws(self):
        g = np.random.default_rng(self.seed)
        n = self.n_draws
        # (0, a] from [0, a) via a - U
        r = self.r_max - g.uniform(0, self.r_max, n)
        mu = r + (self.excess_max - g.uniform(0, self.excess_max, n))
        sigma = self.sigma_max - g.uniform(0, self.sigma_max, n)
        T = self.T_max - g.uniform(0, self.T_max, n)
        return mu, sigma, r, T


def verify_lemma_and_bs(grid: GridSpec = GridSpec()) -> CheckRecord:
    b, x = np.meshgrid(np.asarray(grid.b_values), np.asarray(grid.x_values), indexing="ij")
    margin = frontier.lemma_a1_margin(b, x)
    at_one = x == 1.0
    lemma_ok = bool(np.all(margin >= -frontier.LEMMA_SLACK))
    equality_ok = bool(np.all(np.abs(margin[at_one]) < 1e-10))
    strict_ok = bool(np.all(margin[~at_one] > 0))
    mu, sigma, r, T = grid.draws()
    dom = frontier.bs_dominance_margin(mu, sigma, r, T)
    example_holds, example_margin = frontier.bs_strict_dominance(0.12, 0.15, 0.06, 1.0)
    dom_ok = bool(np.all(dom > 0))
    return CheckRecord(
        "lemma_and_bs_dominance", float(margin.min()), -frontier.LEMMA_SLACK,
        lemma_ok and equality_ok and strict_ok and dom_ok and example_holds,
        {"grid_points": int(margin.size), "n_draws": grid.n_draws}, grid.seed,
        {"lemma_min_margin": float(margin.min()), "equality_at_one": equality_ok,
         "strict_elsewhere": strict_ok, "dominance_min_margin": float(dom.min()),
         "dominance_all_hold": dom_ok, "example_margin": example_margin},
    )


def run_all(market, x0: float, targets, cfg: SimConfig, n_strategies: int = 200,
            region_paths: int | None = None, grid: GridSpec | None = None) -> VerificationReport:
    """Run every check for every target; failures are recorded, not raised."""
    config = {"x0": x0, "targets": list(targets), **cfg.as_dict(),
              "n_strategies": n_strategies}
    if isinstance(market, MarketModel):
        try:
            market = validate_market(market)
        except MarketError as exc:
            rec = CheckRecord("market_validation", float("nan"), float("nan"), False,
                              details={"error": f"{type(exc).__name__}: {exc}"})
            return VerificationReport([rec], cfg.seed, config)
    region_cfg = SimConfig(region_paths or min(cfg.n_paths, 20_000), cfg.n_steps, cfg.seed,
                           "euler", cfg.workers)
    jobs = []
    for z in targets:
        jobs += [
            (f"wealth_cap z={z:.10g}", lambda z=z: verify_wealth_cap(market, x0, z, cfg)),
            (f"risky_exposure z={z:.10g}", lambda z=z: verify_risky_exposure(market, x0, z, cfg)),
            (f"bond_allocation z={z:.10g}", lambda z=z: verify_bond_allocation(market, x0, z, cfg)),
        ]
    jobs.append(("sharpe_separation",
                 lambda: verify_sharpe_separation(market, x0, region_cfg, n_strategies)))
    jobs.append(("lemma_and_bs_dominance",
                 lambda: verify_lemma_and_bs(grid or GridSpec(seed=cfg.seed))))
    checks = []
    for name, job in jobs:
        try:
            checks.append(job())
        except (MarketError, NumericalBlowup) as exc:
            checks.append(CheckRecord(name, float("nan"), float("nan"), False, cfg.as_dict(),
                                      cfg.seed, {"error": f"{type(exc).__name__}: {exc}"}))
    return VerificationReport(checks, cfg.seed, config)

