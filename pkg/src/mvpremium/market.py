"""Deterministic, piecewise-constant investment opportunity sets.

A market is a bond rate r(t), an appreciation vector mu(t) and a volatility
matrix sigma(t), each constant between breakpoints on [0, T]. Every time
integral the closed forms need is an exact interval sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadDimensions,
    BadHorizon,
    Degenerate,
    Infeasible,
    MarketError,
    OutOfHorizon,
    ReversedInterval,
)

DEFAULT_DELTA = 1e-8
INTEGRAL_KINDS = ("rate", "theta2", "excess_abs")


@dataclass(frozen=True, eq=False)
class ParameterCurve:
    """Right-continuous piecewise-constant curve.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``; the last
    interval is closed at T.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise BadDimensions("breakpoints need at least two entries")
        if bp[0] != 0.0:
            raise BadDimensions("breakpoints must start at 0")
        if np.any(np.diff(bp) <= 0):
            raise BadDimensions("breakpoints must be strictly increasing")
        if vals.shape[0] != bp.size - 1:
            raise BadDimensions(
                f"{bp.size - 1} intervals but {vals.shape[0]} values"
            )
        bp.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value, horizon: float) -> "ParameterCurve":
        return cls(np.array([0.0, horizon]), np.asarray(value, dtype=float)[None, ...])

    @property
    def horizon(self) -> float:
        return float(self.breakpoints[-1])

    def interval(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.clip(idx, 0, self.values.shape[0] - 1)

    def __call__(self, t):
        return self.values[self.interval(t)]

    def on_grid(self, breakpoints) -> np.ndarray:
        """Values re-expressed on a finer breakpoint grid (one per interval)."""
        left = np.asarray(breakpoints, dtype=float)[:-1]
        return self.values[self.interval(left)]


@dataclass(frozen=True, eq=False)
class MarketModel:
    """Unvalidated market description; pass through :func:`validate_market`."""

    horizon: float
    rate: ParameterCurve
    appreciation: ParameterCurve
    volatility: ParameterCurve
    delta: float = DEFAULT_DELTA

    @classmethod
    def constant(cls, r, mu, sigma, horizon=1.0, delta=DEFAULT_DELTA) -> "MarketModel":
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        horizon = _check_horizon(horizon)
        return cls(
            horizon=float(horizon),
            rate=ParameterCurve.constant(float(r), horizon),
            appreciation=ParameterCurve.constant(mu, horizon),
            volatility=ParameterCurve.constant(sigma, horizon),
            delta=delta,
        )

    @classmethod
    def from_arrays(cls, horizon, breakpoints, rate, mu, sigma, delta=None) -> "MarketModel":
        bp = np.asarray(breakpoints, dtype=float)
        mu = np.asarray(mu, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        if mu.ndim == 1:
            mu = mu[:, None]
        if sigma.ndim == 1:
            sigma = sigma[:, None, None]
        horizon = _check_horizon(horizon)
        return cls(
            horizon=float(horizon),
            rate=ParameterCurve(bp, np.asarray(rate, dtype=float)),
            appreciation=ParameterCurve(bp, mu),
            volatility=ParameterCurve(bp, sigma),
            delta=DEFAULT_DELTA if delta is None else float(delta),
        )

    def refined(self, extra_breakpoints) -> "MarketModel":
        """Same market on a finer breakpoint grid (values unchanged)."""
        bp = merge_breakpoints(self.rate.breakpoints, self.appreciation.breakpoints,
                               self.volatility.breakpoints, extra_breakpoints)
        return MarketModel.from_arrays(
            self.horizon, bp, self.rate.on_grid(bp), self.appreciation.on_grid(bp),
            self.volatility.on_grid(bp), self.delta,
        )


def _check_horizon(T) -> float:
    T = float(T)
    if not np.isfinite(T) or T <= 0:
        raise BadHorizon(f"horizon must be positive, got {T}")
    return T


def merge_breakpoints(*grids) -> np.ndarray:
    merged = np.unique(np.concatenate([np.asarray(g, dtype=float).ravel() for g in grids]))
    return merged


@dataclass(frozen=True, eq=False)
class ValidatedMarket:
    """Immutable market with all per-interval derived quantities precomputed.

    Construct through :func:`validate_market` only.
    """

    horizon: float
    breakpoints: np.ndarray
    rate: np.ndarray          # (k,)
    mu: np.ndarray            # (k, m)
    sigma: np.ndarray         # (k, m, m)
    delta: float
    excess: np.ndarray = field(repr=False)        # B, (k, m)
    theta: np.ndarray = field(repr=False)         # (k, m)
    theta2: np.ndarray = field(repr=False)        # |theta|^2, (k,)
    mv_direction: np.ndarray = field(repr=False)  # (sigma sigma')^{-1} B, (k, m)
    _cum: dict = field(repr=False)

    @property
    def n_assets(self) -> int:
        return self.mu.shape[1]

    @property
    def n_intervals(self) -> int:
        return self.rate.shape[0]

    def interval(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.clip(idx, 0, self.n_intervals - 1)

    def _check_time(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0.0) or np.any(t_arr > self.horizon) or np.any(np.isnan(t_arr)):
            raise OutOfHorizon(f"time outside [0, {self.horizon}]: {t!r}")

    def risk_premium(self, t):
        self._check_time(t)
        return self.theta[self.interval(t)]

    def antiderivative(self, kind: str, t):
        """F(t) = integral of the chosen integrand from 0 to t (vectorised)."""
        try:
            cum, dens = self._cum[kind]
        except KeyError:
            raise MarketError(f"unknown integral kind {kind!r}") from None
        idx = self.interval(t)
        return cum[idx] + dens[idx] * (np.asarray(t, dtype=float) - self.breakpoints[idx])

    def integrate(self, kind: str, t0: float, t1: float) -> float:
        self._check_time([t0, t1])
        if t1 < t0:
            raise ReversedInterval(f"t0={t0} > t1={t1}")
        if t0 == t1:
            return 0.0
        return float(self.antiderivative(kind, t1) - self.antiderivative(kind, t0))

    def risk_free_return(self) -> float:
        """R_f(T) = exp(int r) - 1."""
        return float(np.expm1(self.integrate("rate", 0.0, self.horizon)))

    def discount(self, t):
        """exp(-int_t^T r ds), vectorised over t."""
        total = self._cum["rate"][0][-1]
        return np.exp(-(total - self.antiderivative("rate", t)))

    def excess_jumps(self) -> np.ndarray:
        """Interior breakpoints where the excess-return vector B is discontinuous."""
        jumps = np.any(self.excess[1:] != self.excess[:-1], axis=1)
        return self.breakpoints[1:-1][jumps]

    def to_model(self) -> MarketModel:
        return MarketModel.from_arrays(
            self.horizon, self.breakpoints, self.rate, self.mu, self.sigma, self.delta
        )


def validate_market(candidate: MarketModel) -> ValidatedMarket:
    """Check a candidate market and precompute its derived curves.

    Raises ``BadHorizon``, ``BadDimensions``, ``Degenerate`` or ``Infeasible``.
    """
    T = _check_horizon(candidate.horizon)
    curves = (candidate.rate, candidate.appreciation, candidate.volatility)
    for c in curves:
        if c.horizon != T:
            raise BadDimensions(f"curve ends at {c.horizon}, horizon is {T}")
    bp = merge_breakpoints(*(c.breakpoints for c in curves))
    rate = candidate.rate.on_grid(bp)
    mu = candidate.appreciation.on_grid(bp)
    sigma = candidate.volatility.on_grid(bp)
    k = bp.size - 1
    if rate.shape != (k,):
        raise BadDimensions("rate curve must be scalar-valued")
    if mu.ndim != 2:
        raise BadDimensions("appreciation curve must be vector-valued")
    m = mu.shape[1]
    if sigma.shape != (k, m, m):
        raise BadDimensions(f"volatility must be {m}x{m} to match appreciation, got {sigma.shape[1:]}")
    for name, arr in (("rate", rate), ("mu", mu), ("sigma", sigma)):
        if not np.all(np.isfinite(arr)):
            raise BadDimensions(f"non-finite entries in {name}")
    if np.any(rate <= 0):
        raise MarketError("interest rate must be positive")
    if np.any(mu <= 0):
        raise MarketError("appreciation rates must be positive")
    delta = float(candidate.delta)
    if not delta > 0:
        raise MarketError("nondegeneracy floor delta must be positive")

    cov = sigma @ np.swapaxes(sigma, 1, 2)
    floor = np.linalg.eigvalsh(cov)[:, 0]
    if np.any(floor < delta):
        i = int(np.argmin(floor))
        raise Degenerate(
            f"smallest eigenvalue of sigma sigma' is {floor[i]:.3e} < delta={delta:.1e} "
            f"on [{bp[i]}, {bp[i + 1]})"
        )

    excess = mu - rate[:, None]
    widths = np.diff(bp)
    excess_abs = np.abs(excess).sum(axis=1)
    if float(excess_abs @ widths) == 0.0:
        raise Infeasible("appreciation equals the interest rate everywhere on [0, T]")

    # theta' = sigma^{-1} B, so |theta|^2 = B'(sigma sigma')^{-1} B
    theta = np.linalg.solve(sigma, excess[..., None])[..., 0]
    theta2 = np.einsum("ki,ki->k", theta, theta)
    mv_direction = np.linalg.solve(cov, excess[..., None])[..., 0]

    cum = {}
    for kind, dens in (("rate", rate), ("theta2", theta2), ("excess_abs", excess_abs)):
        c = np.concatenate([[0.0], np.cumsum(dens * widths)])
        c.setflags(write=False)
        cum[kind] = (c, dens)

    arrays = [bp, rate, mu, sigma, excess, theta, theta2, mv_direction]
    for a in arrays:
        a.setflags(write=False)
    return ValidatedMarket(T, bp, rate, mu, sigma, delta, excess, theta, theta2, mv_direction, cum)


def risk_premium(market: ValidatedMarket, t: float) -> np.ndarray:
    """Market price of risk theta(t), solving sigma(t) theta' = B(t)."""
    return market.risk_premium(t)


def integrate(market: ValidatedMarket, kind: str, t0: float, t1: float) -> float:
    """Exact integral of ``rate``, ``theta2`` or ``excess_abs`` over [t0, t1]."""
    return market.integrate(kind, t0, t1)


def black_scholes_example() -> ValidatedMarket:
    """One stock, r=0.06, mu=0.12, sigma=0.15, T=1."""
    return validate_market(MarketModel.constant(0.06, [0.12], [[0.15]], 1.0))


def two_asset_example(horizon: float = 1.0) -> ValidatedMarket:
    return validate_market(
        MarketModel.constant(0.02, [0.08, 0.12], [[0.20, 0.0], [0.05, 0.25]], horizon)
    )


# -- file format --------------------------------------------------------------

def market_to_dict(model: MarketModel | ValidatedMarket) -> dict:
    if isinstance(model, ValidatedMarket):
        model = model.to_model()
    bp = merge_breakpoints(model.rate.breakpoints, model.appreciation.breakpoints,
                           model.volatility.breakpoints)
    return {
        "horizon": float(model.horizon),
        "breakpoints": bp.tolist(),
        "rate": model.rate.on_grid(bp).tolist(),
        "mu": model.appreciation.on_grid(bp).tolist(),
        "sigma": model.volatility.on_grid(bp).tolist(),
        "delta": float(model.delta),
    }


def market_from_dict(doc: dict) -> MarketModel:
    missing = [k for k in ("horizon", "breakpoints", "rate", "mu", "sigma") if k not in doc]
    if missing:
        raise BadDimensions(f"market file missing keys: {', '.join(missing)}")
    try:
        return MarketModel.from_arrays(
            doc["horizon"], doc["breakpoints"], doc["rate"], doc["mu"], doc["sigma"],
            doc.get("delta"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MarketError):
            raise
        raise BadDimensions(f"malformed market arrays: {exc}") from exc


def load_market(path) -> MarketModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MarketError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise BadDimensions(f"{path}: top level must be an object")
    return market_from_dict(doc)


def save_market(model, path) -> None:
    # json writes floats via repr, which round-trips doubles exactly
    Path(path).write_text(json.dumps(market_to_dict(model), indent=2) + "\n")
