"""One-stock worked example: frontier slope vs buy-and-hold stock, closed form and Monte Carlo."""

import argparse
import math

from mvpremium import frontier as fr
from mvpremium.market import black_scholes_example
from mvpremium.simulate import SimConfig, estimate_terminal_stats, exact_efficient_paths, simulate_wealth
from mvpremium.strategies import ConstantMix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--steps", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    m = black_scholes_example()
    slope = fr.frontier_slope(m)
    mean, std, sharpe = fr.stock_stats_bs(0.12, 0.15, 0.06, 1.0)
    print(f"closed form   slope {slope:.4f}  stock mean {mean:.4f} std {std:.4f} "
          f"sharpe {sharpe:.4f}  premium {fr.premium(slope, sharpe):.2%}")

    cfg = SimConfig(args.paths, args.steps, args.seed)
    stock = estimate_terminal_stats(simulate_wealth(m, 1.0, ConstantMix([1.0]), cfg), 1.0)
    eff = estimate_terminal_stats(exact_efficient_paths(m, 1.0, 1.2, cfg), 1.0)
    for name, s in (("stock (euler)", stock), ("efficient z=1.2", eff)):
        se = math.hypot(s.se_mean, s.sharpe * s.se_std) / s.std_return
        print(f"{name:16s} mean {s.mean_return:.4f} std {s.std_return:.4f} "
              f"sharpe {s.sharpe:.4f} +- {se:.4f}")


if __name__ == "__main__":
    main()
