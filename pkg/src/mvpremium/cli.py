"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 numerical blow-up,
4 failed verification or self-check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import frontier, io
from .errors import MarketError, NumericalBlowup, SelfCheckFailed
from .market import black_scholes_example, load_market, market_to_dict, validate_market
from .region import check_separation, sample_combination_region, sample_risky_region
from .simulate import SimConfig, estimate_terminal_stats, simulate_wealth
from .strategies import ConstantMix, CustomFeedback, Efficient, ThresholdAlpha
from .verify import run_all

EXIT_OK, EXIT_INPUT, EXIT_BLOWUP, EXIT_VERIFY = 0, 2, 3, 4

# one-stock worked example: r=0.06, mu=0.12, sigma=0.15, T=1
EXAMPLE_PARAMS = {"r": 0.06, "mu": 0.12, "sigma": 0.15, "T": 1.0}
EXAMPLE_EXPECTED = {
    "slope": 0.4165,
    "stock_mean": 0.1275,
    "stock_std": 0.1701,
    "stock_sharpe": 0.3862,
    "premium": 0.0785,
}
EXAMPLE_TOL = {"slope": 5e-4, "stock_mean": 5e-4, "stock_std": 5e-4, "stock_sharpe": 5e-4,
               "premium": 1e-3}


def _g6(x) -> str:
    return f"{x:.6g}"


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("MVP_SEED", "0"))


def _run_config(args) -> dict:
    # the output location is not provenance and would break byte-identical reruns
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    cfg["seed"] = _seed(args)
    return cfg


def _market(args):
    if args.market is None:
        return black_scholes_example()
    return validate_market(load_market(args.market))


def _sim_config(args, scheme=None) -> SimConfig:
    return SimConfig(n_paths=args.paths, n_steps=args.steps, seed=_seed(args),
                     scheme=scheme or args.scheme, workers=args.workers)


def cmd_example(args) -> int:
    p = EXAMPLE_PARAMS
    slope = math.sqrt(math.expm1((p["mu"] - p["r"]) ** 2 / p["sigma"] ** 2 * p["T"]))
    mean, std, sharpe = frontier.stock_stats_bs(p["mu"], p["sigma"], p["r"], p["T"])
    result = {
        "slope": slope,
        "risk_free_return": math.expm1(p["r"] * p["T"]),
        "stock_mean": mean,
        "stock_std": std,
        "stock_sharpe": sharpe,
        "premium": frontier.premium(slope, sharpe),
    }
    tol = dict(EXAMPLE_TOL)
    if args.tolerance is not None:
        tol = {k: args.tolerance for k in tol}
    mismatches = {k: (result[k], v) for k, v in EXAMPLE_EXPECTED.items()
                  if abs(result[k] - v) > tol[k]}
    doc = {"params": p, "result": result, "expected": EXAMPLE_EXPECTED, "tolerance": tol,
           "pass": not mismatches}
    for k, v in result.items():
        print(f"{k:18s} {_g6(v)}")
    if args.out:
        io.commit({"example.json": io.dumps(doc)}, args.out)
    if mismatches:
        raise SelfCheckFailed(", ".join(f"{k}={a:.6g} expected {b}" for k, (a, b) in mismatches.items()))
    return EXIT_OK


def cmd_frontier(args) -> int:
    market = _market(args)
    rf_payoff = args.x0 * math.exp(market.integrate("rate", 0.0, market.horizon))
    if args.z:
        points = [frontier.frontier_points(market, args.x0, z, z, 1)[0] for z in args.z]
        points.sort(key=lambda q: q.std_return)
    else:
        z_min = rf_payoff if args.z_min is None else args.z_min
        z_max = max(z_min, 1.5 * args.x0) if args.z_max is None else args.z_max
        points = frontier.frontier_points(market, args.x0, z_min, z_max, args.count)
    rf = market.risk_free_return()
    slope = frontier.frontier_slope(market)
    summary = {"slope": slope, "risk_free_return": rf, "n_points": len(points),
               "market": market_to_dict(market), "config": _run_config(args)}
    print(f"slope {_g6(slope)}  R_f {_g6(rf)}  points {len(points)}")
    io.commit({"frontier.csv": io.points_csv(points, rf), "frontier.json": io.dumps(summary)},
              args.out)
    return EXIT_OK


def _strategy(args, market):
    if args.strategy == "efficient":
        if not args.z:
            raise MarketError("--z is required for the efficient strategy")
        return Efficient(args.z[0])
    if args.strategy == "constant-mix":
        w = args.weights or [1.0 / market.n_assets] * market.n_assets
        return ConstantMix(w)
    return CustomFeedback(lambda t, x: [0.0] * market.n_assets, name="bond only")


def cmd_simulate(args) -> int:
    market = _market(args)
    strategy = _strategy(args, market)
    cfg = _sim_config(args)
    ens = simulate_wealth(market, args.x0, strategy, cfg)
    stats = estimate_terminal_stats(ens, args.x0) if ens.n_paths >= 2 else None
    doc = {"ensemble": ens.summary(), "stats": stats.as_dict() if stats else None,
           "risk_free_return": ens.risk_free_return, "config": _run_config(args)}
    if stats:
        print(f"mean {_g6(stats.mean_return)} (se {_g6(stats.se_mean)})  "
              f"std {_g6(stats.std_return)} (se {_g6(stats.se_std)})  sharpe {_g6(stats.sharpe)}")
    files = {"simulate.json": io.dumps(doc)}
    if args.samples:
        files["terminal_wealth.csv"] = io.samples_csv(ens.terminal_wealth)
    io.commit(files, args.out)
    return EXIT_OK


def cmd_region(args) -> int:
    market = _market(args)
    cfg = _sim_config(args, scheme="euler")
    if args.kind == "risky":
        sample = sample_risky_region(market, args.x0, args.strategies, cfg, w_max=args.w_max)
    else:
        w = args.weights or [1.0 / market.n_assets] * market.n_assets
        specs = [ThresholdAlpha(args.x0 * b, hi, lo)
                 for b in (1.1, 1.2) for hi, lo in ((1.0, 0.5), (1.5, 0.5))]
        sample = sample_combination_region(market, args.x0, ConstantMix(w), specs, cfg)
    rep = check_separation(sample, args.k)
    sidecar = {"frontier": {"risk_free_return": sample.risk_free_return, "slope": sample.slope},
               "separation": rep.as_dict(), "metadata": sample.metadata,
               "config": _run_config(args)}
    print(f"points {rep.n_points}  max sharpe {_g6(rep.max_sharpe)}  slope {_g6(rep.slope)}  "
          f"flags {rep.flags}")
    io.commit({"region.csv": io.points_csv(sample.points, sample.risk_free_return),
               "region.json": io.dumps(sidecar)}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    model = load_market(args.market) if args.market else black_scholes_example().to_model()
    targets = args.z
    if not targets:
        try:
            vm = validate_market(model)
            targets = [args.x0 * math.exp(vm.integrate("rate", 0.0, vm.horizon)), 1.2 * args.x0]
        except MarketError:
            targets = []
    report = run_all(model, args.x0, targets, _sim_config(args, scheme="exact"),
                     n_strategies=args.strategies)
    report.config["run"] = _run_config(args)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  statistic={c.statistic}")
    io.commit({"verify.json": report.to_json()}, args.out)
    if report.checks[0].name == "market_validation":
        print(f"error: {report.checks[0].details['error']}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK if report.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sim=True):
        p.add_argument("--market", help="market JSON file (default: built-in one-stock example)")
        p.add_argument("--x0", type=float, default=1.0)
        p.add_argument("--z", type=float, action="append", help="target terminal wealth (repeatable)")
        p.add_argument("--out", default="out")
        if sim:
            p.add_argument("--paths", type=int, default=10_000)
            p.add_argument("--steps", type=int, default=250)
            p.add_argument("--seed", type=int, default=None, help="default: $MVP_SEED or 0")
            p.add_argument("--scheme", choices=("euler", "exact"), default="euler")
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("frontier", help="closed-form efficient frontier points")
    common(p, sim=False)
    p.add_argument("--z-min", type=float)
    p.add_argument("--z-max", type=float)
    p.add_argument("--count", type=int, default=21)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("simulate", help="Monte Carlo terminal wealth")
    common(p)
    p.add_argument("--strategy", choices=("efficient", "constant-mix", "bond"), default="efficient")
    p.add_argument("--weights", type=float, nargs="+")
    p.add_argument("--samples", action="store_true", help="also write raw terminal wealth CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("region", help="sample risky or combination regions")
    common(p)
    p.add_argument("--kind", choices=("risky", "combination"), default="risky")
    p.add_argument("--strategies", type=int, default=200)
    p.add_argument("--weights", type=float, nargs="+", help="risky mix for --kind combination")
    p.add_argument("--w-max", type=float, default=5.0)
    p.add_argument("--k", type=float, default=3.0, help="standard errors for separation flags")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify", help="run every structural check and write a JSON report")
    common(p)
    p.add_argument("--strategies", type=int, default=200)
    p.set_defaults(func=cmd_verify, steps=32)

    p = sub.add_parser("example", help="reproduce the one-stock worked example")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MarketError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalBlowup as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except SelfCheckFailed as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
