"""Command-line entry point ``cbsc``.

Reports are JSON on stdout; ``sweep`` writes CSV.  Exit codes: 0 ok,
1 verification failure, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import asymptotics as asy
from .capacity import capacity_expansion, capacity_sandwich
from .channel import check_eps, entropy_rate_sandwich
from .constraint import FiniteTypeConstraint, ResourceError
from .markov import MarkovChain, load_chain, random_chain, random_positive_chain, two_state_chain
from .rll import INF, RLLParams, f_general, f_maxentropy_closed_form, golden_family_g, rho0, rll_constraint
from .spectral import noiseless_capacity, parry_chain, perron

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
WEIGHT_FLOOR = 1e-12  # sandwich gaps below this are rounding noise


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    eps: float
    lower: float
    upper: float
    asymptotic: float
    residual: float


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# ---- input handling -------------------------------------------------------

def _constraint(args) -> tuple[FiniteTypeConstraint, RLLParams | None]:
    if args.rll is not None:
        p = RLLParams.parse(args.rll)
        return rll_constraint(p), p
    if args.forbidden is not None:
        return FiniteTypeConstraint.from_file(args.forbidden), None
    raise InputError("one of --rll or --forbidden is required")


def _chain_or_parry(args) -> MarkovChain:
    if getattr(args, "chain", None):
        return load_chain(args.chain)
    c, _ = _constraint(args)
    return parry_chain(c)


def _eps_grid(text: str) -> list[float]:
    try:
        grid = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InputError(f"bad eps grid {text!r}") from None
    if not grid:
        raise InputError("empty eps grid")
    for e in grid:
        if not 0.0 < e <= 0.5:
            raise InputError(f"eps values must lie in (0, 1/2], got {e}")
    return grid


# ---- subcommands ----------------------------------------------------------

def cmd_capacity(args) -> int:
    c, params = _constraint(args)
    scale = 1.0 / math.log(2.0) if args.bits else 1.0
    if args.noiseless:
        _emit({"C0": noiseless_capacity(c) * scale, "units": "bits" if args.bits else "nats"})
        return EXIT_OK
    e = capacity_expansion(c)
    report = {
        "C0": e.c0 * scale,
        "c_log": e.c_log * scale,
        "c_lin": e.c_lin * scale,
        "lambda": perron(c).lam,
        "order": c.order,
        "units": "bits" if args.bits else "nats",
    }
    if params is not None and not (params.finite and params.k <= params.d):
        report["rho0"] = rho0(params)
    _emit(report)
    return EXIT_OK


def _stability_table(X: MarkovChain) -> dict:
    m = max(X.order, 1)
    f_tab = {f"{n},{k}": asy.f_nk(X, n, k) for n in range(2 * m, 3 * m + 3) for k in range(m + 1)}
    g_tab = {f"{n},{k}": asy.g_nk(X, n, k) for n in range(3 * m, 3 * m + 3) for k in range(m + 1)}
    return {"f_nk": f_tab, "g_nk": g_tab,
            "f_spread": max(f_tab.values()) - min(f_tab.values()),
            "g_spread": max(g_tab.values()) - min(g_tab.values())}


def cmd_coeffs(args) -> int:
    X = _chain_or_parry(args)
    e = asy.expansion_of(X)
    _emit({"H": e.h0, "f": e.f, "g": e.g, "order": X.order, "stability": _stability_table(X)})
    return EXIT_OK


def cmd_entropy(args) -> int:
    X = _chain_or_parry(args)
    eps = check_eps(args.eps)
    lo, hi = entropy_rate_sandwich(X, eps, args.n)
    e = asy.expansion_of(X)
    _emit({"eps": eps, "n": args.n, "lower": lo, "upper": hi, "gap": hi - lo,
           "asymptotic": e.evaluate(eps)})
    return EXIT_OK


def fit_coefficients(records: Sequence[SweepRecord]) -> tuple[float, float, float]:
    """Weighted least squares of midpoints on ``1, eps log(1/eps), eps``."""
    eps = np.array([r.eps for r in records])
    mid = np.array([0.5 * (r.lower + r.upper) for r in records])
    gap = np.array([max(r.upper - r.lower, WEIGHT_FLOOR) for r in records])
    w = 1.0 / gap
    D = np.stack([np.ones_like(eps), eps * np.log(1.0 / eps), eps], axis=1)
    sol, *_ = np.linalg.lstsq(D * w[:, None], mid * w, rcond=None)
    return float(sol[0]), float(sol[1]), float(sol[2])


def sweep(X: MarkovChain, grid: Sequence[float], n: int) -> list[SweepRecord]:
    e = asy.expansion_of(X)
    out = []
    for eps in grid:
        lo, hi = entropy_rate_sandwich(X, eps, n)
        a = e.evaluate(eps)
        out.append(SweepRecord(eps, lo, hi, a, 0.5 * (lo + hi) - a))
    return out


def _rel(a: float, b: float) -> float:
    if b == 0.0:
        return abs(a)
    return abs(a - b) / abs(b)


def cmd_sweep(args) -> int:
    X = _chain_or_parry(args)
    grid = _eps_grid(args.eps)
    records = sweep(X, grid, args.n)
    print("eps,lower,upper,asymptotic,residual")
    for r in records:
        print(",".join(_fmt(v) for v in (r.eps, r.lower, r.upper, r.asymptotic, r.residual)))
    e = asy.expansion_of(X)
    if len(records) >= 3:
        a, b, c = fit_coefficients(records)
        print(f"# fit a={_fmt(a)} b={_fmt(b)} c={_fmt(c)} f={_fmt(e.f)} g={_fmt(e.g)} "
              f"rel_err_b={_fmt(_rel(b, e.f))} rel_err_c={_fmt(_rel(c, e.g))}")
    else:
        print("# fit skipped: need at least 3 eps values")
    return EXIT_OK


def cmd_bounds(args) -> int:
    c, _ = _constraint(args)
    eps = check_eps(args.eps)
    if args.m is None:
        args.m = max(c.order, 1)
    if args.n is None:
        args.n = 3 * args.m
    lo, hi = capacity_sandwich(c, eps, args.m, args.n, tol=args.tol)
    e = capacity_expansion(c)
    _emit({"eps": eps, "m": args.m, "n": args.n, "lower": lo, "upper": hi,
           "expansion": e.evaluate(eps)})
    return EXIT_OK


# ---- verify ---------------------------------------------------------------

Check = tuple[str, bool, str]


def _check(name: str, ok: bool, detail: str) -> Check:
    return name, bool(ok), detail


def stability_checks(chains: Sequence[tuple[str, MarkovChain]], tol: float = 1e-12) -> list[Check]:
    out = []
    for label, X in chains:
        t = _stability_table(X)
        out.append(_check(f"stability f {label}", t["f_spread"] <= tol, f"spread {t['f_spread']:.3g}"))
        out.append(_check(f"stability g {label}", t["g_spread"] <= tol, f"spread {t['g_spread']:.3g}"))
    return out


def closed_form_checks(chains: Sequence[tuple[str, MarkovChain]], tol: float = 1e-12) -> list[Check]:
    out = []
    for label, X in chains:
        m = X.order
        pairs = [
            ("drift", asy.drift_sum(X, 3 * m, 0), asy.drift_sum_closed_form(X)),
            ("boundary-log", asy.boundary_log_sum(X, 2 * m, 0), asy.boundary_log_sum_closed_form(X)),
            ("log-ratio", asy.log_ratio_sum(X, 3 * m, 0), asy.log_ratio_sum_closed_form(X)),
        ]
        for name, a, b in pairs:
            out.append(_check(f"closed form {name} {label}", abs(a - b) <= tol, f"diff {a - b:.3g}"))
    return out


def default_fixtures(seed: int = 0) -> list[tuple[str, MarkovChain]]:
    rng = np.random.default_rng(seed)
    out = []
    for d, k in [(1, INF), (1, 3), (2, INF)]:
        c = rll_constraint(RLLParams(d, k))
        out.append((f"parry S({d},{k})", parry_chain(c)))
        out.append((f"random S({d},{k})", random_chain(c, c.order, rng)))
    return out


def run_verify(extra: Sequence[tuple[str, MarkovChain]] = (), seed: int = 0) -> list[Check]:
    chains = default_fixtures(seed) + list(extra)
    checks = stability_checks(chains) + closed_form_checks(chains)
    for d, k in [(1, INF), (1, 3), (2, INF), (2, 4), (1, 2)]:
        p = RLLParams(d, k)
        X = parry_chain(rll_constraint(p))
        fe = asy.f_nk(X, 2 * X.order, 0)
        checks.append(_check(f"f run-length sum S{p}", abs(f_general(X, p) - fe) <= 1e-12, ""))
        checks.append(_check(f"f rho0 closed form S{p}", abs(f_maxentropy_closed_form(p) - fe) <= 1e-10, ""))
        if not (p.finite and p.k <= p.d):
            diff = math.log(1.0 / rho0(p)) - noiseless_capacity(rll_constraint(p))
            checks.append(_check(f"perron vs rho0 S{p}", abs(diff) <= 1e-10, f"diff {diff:.3g}"))
    rng = np.random.default_rng(seed)
    for i in range(3):
        a = rng.uniform(0.1, 0.9)
        X = two_state_chain(a, 1.0)
        diff = golden_family_g(a) - asy.g_nk(X, 3, 0)
        checks.append(_check(f"g closed form pi01={a:.4f}", abs(diff) <= 1e-10, f"diff {diff:.3g}"))
    for order in (1, 2):
        X = random_positive_chain(order, rng)
        diff = asy.g_nk(X, 3 * order, 0) - asy.g_positive(X)
        checks.append(_check(f"g positive order {order}", abs(diff) <= 1e-9 and asy.f_nk(X, 2 * order, 0) == 0.0,
                             f"diff {diff:.3g}"))
    return checks


def cmd_verify(args) -> int:
    extra = []
    if args.chain:
        extra.append((f"chain {args.chain}", load_chain(args.chain)))
    t0 = time.perf_counter()
    checks = run_verify(extra, seed=args.seed)
    failed = [c for c in checks if not c[1]]
    _emit({"checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in checks],
           "failed": len(failed), "seconds": round(time.perf_counter() - t0, 3)})
    return EXIT_VERIFY if failed else EXIT_OK


# ---- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbsc", description="Constrained BSC capacity and entropy tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p, chain: bool):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--rll", metavar="D,K", help="(d,k) run-length constraint; K may be 'inf'")
        g.add_argument("--forbidden", metavar="PATH", help="file with one forbidden word per line")
        if chain:
            g.add_argument("--chain", metavar="PATH", help="JSON chain file")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("capacity", help="noiseless capacity and small-noise expansion")
    add_source(p, chain=False)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--bits", action="store_true")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("coeffs", help="H, f, g of a chain with the stability table")
    add_source(p, chain=True)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("entropy", help="Birch sandwich of the output entropy rate")
    add_source(p, chain=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("sweep", help="CSV of sandwiches over an eps grid with a coefficient fit")
    add_source(p, chain=True)
    p.add_argument("--eps", default="1e-2,3e-3,1e-3,3e-4", help="comma-separated grid")
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="capacity sandwich from optimized bounds")
    add_source(p, chain=False)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--m", type=int, default=None, help="chain order (default: topological order, at least 1)")
    p.add_argument("--n", type=int, default=None, help="conditioning length (default: 3m)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--chain", metavar="PATH", help="extra chain to include in the checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # includes bad chains, reducible constraints, bad JSON
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ResourceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
