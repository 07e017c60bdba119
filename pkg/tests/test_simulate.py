import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvpremium import frontier as fr
from mvpremium.errors import DegenerateEnsemble, NumericalBlowup, SchemeMismatch, BadParams
from mvpremium.market import MarketModel, validate_market
from mvpremium.simulate import (
    PathEnsemble,
    SimConfig,
    estimate_terminal_stats,
    exact_efficient_paths,
    lognormal_mix_stats,
    simulate_wealth,
    time_grid,
)
from mvpremium.strategies import (
    Combination,
    ConstantAlpha,
    ConstantMix,
    CustomFeedback,
    DeterministicAlpha,
    Efficient,
    RandomSwitchAlpha,
    ThresholdMix,
    TimeVaryingMix,
)


def zero_rule(m):
    return CustomFeedback(lambda t, x: np.zeros(m), name="bond only")


def test_config_validation():
    with pytest.raises(BadParams):
        SimConfig(n_paths=0)
    with pytest.raises(BadParams):
        SimConfig(scheme="milstein")


def test_grid_includes_breakpoints():
    m = validate_market(MarketModel.from_arrays(1.0, [0, 0.33, 1], [0.02, 0.03], [[0.1], [0.1]],
                                                [[[0.2]], [[0.2]]]))
    g = time_grid(m, 4)
    assert 0.33 in g and g[0] == 0 and g[-1] == 1 and g.size == 6


def test_bond_only_is_deterministic(two):
    m = validate_market(MarketModel.from_arrays(2.0, [0, 1, 2], [0.02, 0.04], [[0.1, 0.1]] * 2,
                                                [[[0.2, 0], [0.05, 0.25]]] * 2))
    ens = simulate_wealth(m, 1.0, zero_rule(2), SimConfig(100, 37, seed=1))
    assert np.allclose(ens.terminal_wealth, math.exp(0.06), rtol=1e-14, atol=0)
    stats = estimate_terminal_stats(ens, 1.0)
    assert stats.std_return == 0.0 and math.isnan(stats.sharpe)
    assert stats.mean_return == pytest.approx(math.expm1(0.06), abs=1e-13)


def test_exact_boundary_is_deterministic(bs):
    z = math.exp(0.06)
    ens = exact_efficient_paths(bs, 1.0, z, SimConfig(50, 10, store_paths=True))
    expected = np.exp(0.06 * ens.grid)
    assert np.allclose(ens.paths, expected, rtol=1e-14, atol=0)
    assert ens.cap_gap_max == 0.0 and ens.cap_gap_min == 0.0


def test_exact_scheme_needs_efficient(bs):
    with pytest.raises(SchemeMismatch):
        simulate_wealth(bs, 1.0, ConstantMix([1.0]), SimConfig(10, 10, scheme="exact"))


def test_exact_moments(bs):
    ens = exact_efficient_paths(bs, 1.0, 1.2, SimConfig(100_000, 10, seed=2))
    x = ens.terminal_wealth
    n = x.size
    se_mean = x.std(ddof=1) / math.sqrt(n)
    assert abs(x.mean() - 1.2) < 3 * se_mean
    dev = (x - x.mean()) ** 2
    se_var = dev.std(ddof=1) / math.sqrt(n)
    assert abs(x.var(ddof=1) - fr.min_variance(bs, 1.0, 1.2)) < 3 * se_var
    assert ens.cap_violations == 0 and ens.cap_gap_max < 0


def test_efficient_sharpe(bs):
    s = estimate_terminal_stats(exact_efficient_paths(bs, 1.0, 1.2, SimConfig(100_000, 4, seed=3)), 1.0)
    se = math.hypot(s.se_mean, s.sharpe * s.se_std) / s.std_return
    assert abs(s.sharpe - fr.frontier_slope(bs)) < 3 * se


def test_stock_ensemble_matches_worked_example(bs):
    ens = simulate_wealth(bs, 1.0, ConstantMix([1.0]), SimConfig(50_000, 100, seed=4))
    s = estimate_terminal_stats(ens, 1.0)
    assert abs(s.mean_return - math.expm1(0.12)) < 3 * s.se_mean
    assert abs(s.std_return - 0.170080) < 3 * s.se_std
    se = math.hypot(s.se_mean, s.sharpe * s.se_std) / s.std_return
    assert abs(s.sharpe - 0.3862) < 3 * se


def test_reproducible_and_worker_invariant(two):
    cfg = SimConfig(20_000, 16, seed=9)
    strat = ThresholdMix(1.05, [0.3, 0.7], [1.5, -0.5])
    a = simulate_wealth(two, 1.0, strat, cfg)
    b = simulate_wealth(two, 1.0, strat, cfg)
    c = simulate_wealth(two, 1.0, strat, SimConfig(20_000, 16, seed=9, workers=3))
    assert a.terminal_wealth.tobytes() == b.terminal_wealth.tobytes() == c.terminal_wealth.tobytes()
    d = simulate_wealth(two, 1.0, strat, SimConfig(20_000, 16, seed=10))
    assert not np.array_equal(a.terminal_wealth, d.terminal_wealth)


def test_path_prefix_stable(two):
    # path i depends only on (seed, i): a smaller run is a prefix of a larger one
    a = simulate_wealth(two, 1.0, Efficient(1.3), SimConfig(100, 8, seed=5))
    b = simulate_wealth(two, 1.0, Efficient(1.3), SimConfig(9000, 8, seed=5))
    assert np.array_equal(a.terminal_wealth, b.terminal_wealth[:100])


def test_euler_and_exact_share_noise(bs):
    cfg = SimConfig(2000, 2000, seed=6)
    e = simulate_wealth(bs, 1.0, Efficient(1.2), cfg)
    x = exact_efficient_paths(bs, 1.0, 1.2, cfg)
    assert np.corrcoef(e.terminal_wealth, x.terminal_wealth)[0, 1] > 0.999
    assert np.abs(e.terminal_wealth - x.terminal_wealth).max() < 0.05


def test_blowup_detected(bs):
    rule = CustomFeedback(lambda t, x: 1e3 * x[:, None] ** 2, name="explosive")
    with pytest.raises(NumericalBlowup) as exc:
        simulate_wealth(bs, 1.0, rule, SimConfig(100, 50, seed=0))
    assert exc.value.step >= 1


def test_degenerate_ensemble():
    ens = PathEnsemble(np.array([1.0]), np.array([0.0, 1.0]), 0, "euler", "x", 0.0)
    with pytest.raises(DegenerateEnsemble):
        estimate_terminal_stats(ens, 1.0)


def test_lognormal_mix_stock(bs):
    mean, std = lognormal_mix_stats(bs, [1.0])
    assert (mean, std) == pytest.approx(fr.stock_stats_bs(0.12, 0.15, 0.06, 1.0)[:2], rel=1e-14)


def test_time_varying_closed_form(two):
    # piecewise-constant weights are still lognormal: sum the per-phase log moments
    w = np.array([[0.2, 0.8], [1.4, -0.4]])
    strat = TimeVaryingMix([0, 0.5, 1.0], w)
    drift = var = 0.0
    for wi in w:
        v = two.sigma[0].T @ wi
        drift += 0.5 * (two.mu[0] @ wi - 0.5 * v @ v)
        var += 0.5 * (v @ v)
    mean = math.exp(drift + var / 2) - 1
    std = math.exp(drift + var / 2) * math.sqrt(math.expm1(var))
    s = estimate_terminal_stats(simulate_wealth(two, 1.0, strat, SimConfig(50_000, 64, seed=8)), 1.0)
    assert abs(s.mean_return - mean) < 3 * s.se_mean
    assert abs(s.std_return - std) < 3 * s.se_std


def test_constant_alpha_is_linear(two):
    base = ConstantMix([0.5, 0.5])
    cfg = SimConfig(500, 16, seed=2)
    x = simulate_wealth(two, 1.0, base, cfg).terminal_wealth
    rf = math.exp(two.integrate("rate", 0, 1))
    for a in (0.0, 0.4, 1.7):
        c = simulate_wealth(two, 1.0, Combination(base, ConstantAlpha(a)), cfg).terminal_wealth
        assert np.allclose(c, a * x + (1 - a) * rf, rtol=1e-12, atol=1e-12)


def test_deterministic_and_random_alpha_run(two):
    base = ConstantMix([0.5, 0.5])
    cfg = SimConfig(2000, 20, seed=2)
    d = simulate_wealth(two, 1.0, Combination(base, DeterministicAlpha([0, 0.5, 1], [1.0, 0.0])), cfg)
    assert np.all(np.isfinite(d.terminal_wealth))
    frozen = simulate_wealth(two, 1.0, Combination(base, RandomSwitchAlpha(0.0, (0.7, 0.1))), cfg)
    const = simulate_wealth(two, 1.0, Combination(base, ConstantAlpha(0.7)), cfg)
    assert np.allclose(frozen.terminal_wealth, const.terminal_wealth, rtol=1e-14)
    busy = simulate_wealth(two, 1.0, Combination(base, RandomSwitchAlpha(5.0, (0.7, 0.1))), cfg)
    assert not np.allclose(busy.terminal_wealth, const.terminal_wealth)


def test_weights_must_sum_to_one():
    with pytest.raises(BadParams):
        ConstantMix([0.5, 0.4])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 40), st.floats(1.07, 2.0))
def test_exact_never_exceeds_cap(seed, steps, z):
    from mvpremium.market import two_asset_example
    m = two_asset_example()
    ens = exact_efficient_paths(m, 1.0, z, SimConfig(500, steps, seed=seed))
    assert ens.cap_violations == 0 and ens.cap_gap_max < 0
