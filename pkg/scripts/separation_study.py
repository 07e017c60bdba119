"""Sample pure-risky strategies in a market file and compare their Sharpe ratios with the frontier."""

import argparse

from mvpremium.market import load_market, two_asset_example, validate_market
from mvpremium.region import check_separation, point_sharpe, sample_risky_region
from mvpremium.simulate import SimConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--market")
    ap.add_argument("--strategies", type=int, default=200)
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--top", type=int, default=5)
    args = ap.parse_args()
    m = validate_market(load_market(args.market)) if args.market else two_asset_example()

    sample = sample_risky_region(m, 1.0, args.strategies, SimConfig(args.paths, args.steps, args.seed))
    rep = check_separation(sample)
    ranked = sorted(sample.points, key=lambda p: -point_sharpe(p, sample.risk_free_return)[0])
    print(f"frontier slope {rep.slope:.4f}  best risky {rep.max_sharpe:.4f}  flags {rep.flags}")
    for p in ranked[:args.top]:
        s, se = point_sharpe(p, sample.risk_free_return)
        print(f"  {s:.4f} +- {se:.4f}  {p.label}")


if __name__ == "__main__":
    main()
