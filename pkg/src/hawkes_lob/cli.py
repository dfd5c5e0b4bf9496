"""Command-line front end: ``hawkes-lob {simulate,fit,analyze,verify,generate}``.

Exit codes: 0 success, 2 usage or model error, 3 failed verification.
All randomness derives from ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .compound import CompoundModel, simulate_compound
from .diffusion import diffusion_coefficient, nonlinear_diffusion_coefficient
from .empirical import (
    DEFAULT_WINDOWS,
    VARIANTS,
    best_fit_coefficient,
    clustering_counts,
    default_jobs,
    empirical_std_curve,
    fit_state_model,
    mean_squared_residual,
    qq_poisson_data,
    sqrt_transform,
    theoretical_std_curve,
    verify_fclt,
    verify_lln,
    write_curves,
)
from .hawkes import (
    Capped,
    EventSequence,
    ExponentialKernel,
    HawkesSpec,
    Identity,
    Indicator,
    NullKernel,
    PowerLawKernel,
    stationary_unit_arrivals,
)
from .lob import DEFAULT_TRIM, HALF_TICK, liquidity_summary, mid_price_events, parse_lob, tick_histogram, write_lob
from .markov import chain_from_json
from .mle import FitConfig, empirical_unit_arrivals, fit_mle
from .synthetic import PROFILES, synthetic_day

log = logging.getLogger("hawkes_lob")

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 2, 3


class CliError(Exception):
    """A user-facing error reported with exit code 2."""


# --------------------------------------------------------------------------
# shared argument groups


def _add_hawkes_args(p: argparse.ArgumentParser, defaults=(1.0, 1.0, 2.0)) -> None:
    g = p.add_argument_group("arrivals")
    g.add_argument("--lambda", dest="baseline", type=float, default=defaults[0], help="baseline rate")
    g.add_argument("--kernel", choices=("exp", "power", "none"), default="exp")
    g.add_argument("--alpha", type=float, default=defaults[1], help="exponential kernel jump size")
    g.add_argument("--beta", type=float, default=defaults[2], help="exponential kernel decay")
    g.add_argument("--pl-k", type=float, default=0.5, help="power-law scale k")
    g.add_argument("--pl-c", type=float, default=1.0, help="power-law offset c")
    g.add_argument("--pl-p", type=float, default=2.5, help="power-law exponent p")
    g.add_argument("--link", choices=("identity", "indicator", "capped"), default="identity")
    g.add_argument("--ceiling", type=float, default=10.0, help="cap for --link capped")


def _add_mark_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("marks")
    g.add_argument("--delta", type=float, default=HALF_TICK, help="tick size for the two-state sign model")
    g.add_argument("--p", nargs=2, type=float, metavar=("PDD", "PUU"), default=(0.5, 0.5),
                   help="stay probabilities of the down and up states")
    g.add_argument("--chain", type=Path, help="chain JSON (P and marks); overrides --delta/--p")


def _spec_from_args(args) -> HawkesSpec:
    if args.kernel == "exp":
        kernel = ExponentialKernel(args.alpha, args.beta)
    elif args.kernel == "power":
        kernel = PowerLawKernel(args.pl_k, args.pl_c, args.pl_p)
    else:
        kernel = NullKernel()
    link = {"identity": Identity(), "indicator": Indicator()}.get(args.link) or Capped(args.ceiling)
    return HawkesSpec(args.baseline, kernel, link)


def _model_from_args(args) -> CompoundModel:
    spec = _spec_from_args(args)
    spec.require_stationary()
    if args.chain is not None:
        P, marks, _ = chain_from_json(_read_text(args.chain))
        return CompoundModel(spec, P, marks)
    p_dd, p_uu = args.p
    return CompoundModel.chpdo(spec, p_dd, p_uu, args.delta)


def _read_text(path: Path) -> str:
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    return path.read_text()


def _out_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    model = _model_from_args(args)
    path = simulate_compound(model, args.horizon, seed=args.seed, s0=args.s0)
    out = _out_dir(args.out)
    path.events.to_csv(out / "events.csv", marks=path.changes)
    prices = path.prices()
    _write_rows(
        out / "path.csv",
        ["time", "price"],
        [(repr(0.0), repr(float(args.s0)))] + [(repr(float(t)), repr(float(s))) for t, s in zip(path.events.times, prices)],
    )
    print(f"{len(path.events)} events on [0, {args.horizon:g}] "
          f"({len(path.events) / args.horizon:.4f} per unit time) -> {out}")
    return EXIT_OK


def _fit_config(args) -> FitConfig:
    return FitConfig(budget=args.budget, restarts=args.restarts, seed=args.seed)


def _fit_payload(fit, events: EventSequence) -> dict:
    payload = json.loads(fit.to_json())
    payload["empirical_unit_arrivals"] = empirical_unit_arrivals(events)
    payload["events"] = len(events)
    payload["horizon"] = events.horizon
    return payload


def cmd_fit(args) -> int:
    events = EventSequence.from_csv(args.events, horizon=args.horizon)
    fit = fit_mle(events, _fit_config(args))
    out = _out_dir(args.out)
    _write_json(out / "fit.json", _fit_payload(fit, events))
    print(f"lambda={fit.baseline:.4f} alpha={fit.alpha:.4f} beta={fit.beta:.4f} "
          f"mu_hat={fit.mu_hat:.4f} converged={fit.converged}")
    if fit.supercritical:
        log.warning("fitted branching ratio %.4f >= 1", fit.mu_hat)
    return EXIT_OK


def cmd_analyze(args) -> int:
    series = parse_lob(args.messages, args.orderbook)
    changes = mid_price_events(series, trim=args.trim)
    events = changes.to_events()
    out = _out_dir(args.out)

    _write_json(out / "liquidity.json", liquidity_summary(series, changes))
    hist = tick_histogram(changes)
    _write_rows(out / "tick_hist.csv", ["multiple", "count"], zip(hist["multiple"], hist["count"]))
    gaps, expected = qq_poisson_data(events)
    _write_rows(out / "qq.csv", ["empirical", "exponential"], ((repr(float(a)), repr(float(b))) for a, b in zip(gaps, expected)))
    grid, counts = clustering_counts(events, window=args.cluster_window)
    _write_rows(out / "clustering.csv", ["time", "count"], ((repr(float(t)), int(c)) for t, c in zip(grid, counts)))

    if args.params is not None:
        baseline, alpha, beta = args.params
        fit_info = {"baseline": baseline, "alpha": alpha, "beta": beta, "source": "command line"}
    else:
        fit = fit_mle(events, _fit_config(args))
        baseline, alpha, beta = fit.baseline, fit.alpha, fit.beta
        fit_info = _fit_payload(fit, events)
    _write_json(out / "fit.json", fit_info)

    model, P, lp = fit_state_model(changes, args.variant, args.quantiles, not args.quantiles_total, args.delta)
    (out / "states.json").write_text(model.to_json(P) + "\n")
    (out / "limit_params.json").write_text(lp.to_json() + "\n")

    spec = HawkesSpec.exponential(baseline, alpha, beta)
    if args.variant == "nonlinear":
        spec = HawkesSpec.exponential(baseline, alpha, beta, Capped(args.ceiling))
        rate, rate_se = stationary_unit_arrivals(spec, np.random.default_rng(args.seed))
        coefficient = nonlinear_diffusion_coefficient(lp.sigma_star, rate)
    else:
        spec.require_stationary()
        rate, rate_se = spec.stationary_rate(), 0.0
        coefficient = diffusion_coefficient(lp.sigma_star, baseline, spec.branching_ratio)

    windows = DEFAULT_WINDOWS
    emp = empirical_std_curve(changes, lp.a_star, windows)
    theo = theoretical_std_curve(coefficient, windows)
    write_curves(out / "curves.csv", [emp, theo, sqrt_transform(emp), sqrt_transform(theo)])
    mse = mean_squared_residual(emp, theo, transform=not args.raw_mse)
    _write_json(out / "mse.json", {"variant": args.variant, "states": model.n, "mse": mse,
                                   "transformed": not args.raw_mse})
    best = best_fit_coefficient(emp, coefficient)
    _write_json(out / "bestfit.json", {
        "theoretical": coefficient,
        "regression": best.coefficient,
        "percent_error": best.percent_error,
        "expected_unit_arrivals": rate,
        "expected_unit_arrivals_se": rate_se,
        "sigma_star": lp.sigma_star,
        "a_star": lp.a_star,
    })
    print(f"{len(changes)} price changes, {model.n} states, theoretical {coefficient:.6f}, "
          f"regression {best.coefficient:.6f} ({best.percent_error:.2f}% error), mse {mse:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = _model_from_args(args)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    common = dict(n=args.n, t=args.t, seed=args.seed, jobs=jobs, a_star=args.a_star)
    lln = verify_lln(model, paths=args.lln_paths, **common)
    fclt = verify_fclt(model, paths=args.paths, **common)
    passed = abs(lln.z) <= args.z_limit and abs(fclt.z) <= args.z_limit
    out = _out_dir(args.out)
    _write_json(out / "verify.json", {
        "lln": _finite(lln.to_dict()),
        "fclt": _finite(fclt.to_dict()),
        "z_limit": args.z_limit,
        "passed": passed,
    })
    print(f"LLN  sample {lln.sample:.6g} predicted {lln.predicted:.6g} z {lln.z:+.2f}")
    print(f"FCLT sample {fclt.sample:.6g} predicted {fclt.predicted:.6g} z {fclt.z:+.2f}")
    print("PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FAILED


def _finite(d: dict) -> dict:
    # JSON has no infinities; an infinite z means a degenerate mismatch
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def cmd_generate(args) -> int:
    profile = PROFILES[args.ticker]
    day = synthetic_day(profile, seed=args.seed, orders_per_second=args.orders_per_second)
    out = _out_dir(args.out)
    stem = f"{args.ticker}_synthetic"
    write_lob(day, out / f"{stem}_message.csv", out / f"{stem}_orderbook.csv")
    print(f"{len(day)} book rows -> {out / stem}_{{message,orderbook}}.csv")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkes-lob", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a compound Hawkes mid-price path")
    _add_hawkes_args(p)
    _add_mark_args(p)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--s0", type=float, default=0.0, help="initial price")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_simulate)

    def add_fit_args(q):
        q.add_argument("--budget", type=int, default=FitConfig.budget, help="likelihood evaluations")
        q.add_argument("--restarts", type=int, default=FitConfig.restarts)
        q.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fit", help="maximum-likelihood fit of an exponential Hawkes process")
    p.add_argument("events", type=Path, help="CSV with a 'time' column")
    p.add_argument("--horizon", type=float, help="observation end (default: last event time)")
    add_fit_args(p)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("analyze", help="run the empirical pipeline on a LOBSTER file pair")
    p.add_argument("--messages", type=Path, required=True)
    p.add_argument("--orderbook", type=Path, required=True)
    p.add_argument("--variant", choices=VARIANTS, default="quantile")
    p.add_argument("--quantiles", type=int, default=16)
    p.add_argument("--quantiles-total", action="store_true",
                   help="split --quantiles between the two sides instead of using it per side")
    p.add_argument("--delta", type=float, default=HALF_TICK)
    p.add_argument("--ceiling", type=float, default=10.0, help="cap for the nonlinear variant")
    p.add_argument("--trim", type=float, default=DEFAULT_TRIM, help="seconds dropped after open and before close")
    p.add_argument("--params", nargs=3, type=float, metavar=("LAMBDA", "ALPHA", "BETA"),
                   help="skip fitting and use these Hawkes parameters")
    p.add_argument("--cluster-window", type=float, default=60.0)
    p.add_argument("--raw-mse", action="store_true", help="compare untransformed curves")
    add_fit_args(p)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="Monte Carlo check of the LLN and diffusion limits")
    _add_hawkes_args(p)
    _add_mark_args(p)
    p.add_argument("--n", type=float, default=1e4, help="time scale")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=1000, help="paths for the diffusion check")
    p.add_argument("--lln-paths", type=int, default=200)
    p.add_argument("--a-star", type=float, help="override the centring mark mean")
    p.add_argument("--z-limit", type=float, default=4.0)
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default $HAWKES_LOB_JOBS or 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write a synthetic LOBSTER day")
    p.add_argument("--ticker", choices=sorted(PROFILES), default="AMZN")
    p.add_argument("--orders-per-second", type=float, help="filler message rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, CliError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
