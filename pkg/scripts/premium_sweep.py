"""Premium of dynamic trading over the stock across horizons and volatilities (one stock).

Writes a CSV with columns T, sigma, slope, stock_sharpe, premium.
"""

import argparse
import sys

import numpy as np

from mvpremium import frontier as fr


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=0.06)
    ap.add_argument("--mu", type=float, default=0.12)
    ap.add_argument("--horizons", type=float, nargs="+", default=[0.25, 0.5, 1, 2, 5, 10, 20])
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.1, 0.15, 0.2, 0.3])
    args = ap.parse_args()

    out = sys.stdout
    out.write("T,sigma,slope,stock_sharpe,premium\n")
    for T in args.horizons:
        for s in args.sigmas:
            slope = float(np.sqrt(np.expm1(((args.mu - args.r) / s) ** 2 * T)))
            sharpe = fr.stock_stats_bs(args.mu, s, args.r, T)[2]
            out.write(f"{T},{s},{slope!r},{sharpe!r},{fr.premium(slope, sharpe)!r}\n")


if __name__ == "__main__":
    main()
