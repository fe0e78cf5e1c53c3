"""Command-line entry point: ``sizebias {bounds,oracle,verify,patterns}``.

Exit codes: 0 pass, 1 fail, 2 usage error, 3 model error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import bounds, oracle
from .couplings import (
    LocalDependenceModel,
    coupling_radius_local,
    observed_statistic_max,
    overlap_degree,
)
from .errors import (
    DegenerateCoordinate,
    InvalidPatternDims,
    InvalidPmf,
    ModelSpecError,
    NegativeT,
    NeighborhoodTooLarge,
    NonPositiveInput,
    StateSpaceTooLarge,
)
from .harness import DEFAULT_GRID, McConfig, dumps, verify
from .model import moments
from .patterns import (
    PatternModel,
    as_permutation,
    count,
    pattern_mean,
    pattern_variance,
    pattern_variance_exact,
    reorder,
    relative_order_indicator,
)
from .specs import load_model

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_MODEL = 0, 1, 2, 3
MODEL_ERRORS = (
    ModelSpecError,
    InvalidPmf,
    StateSpaceTooLarge,
    NeighborhoodTooLarge,
    DegenerateCoordinate,
)


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _default_workers() -> int:
    env = os.environ.get("SIZEBIAS_WORKERS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# bounds ------------------------------------------------------------------------


def cmd_bounds(args) -> int:
    result: dict = {}
    if args.pattern:
        if None in (args.n, args.m, args.k):
            raise UsageError("--pattern needs --n, --m and --k")
        K1, K2 = bounds.pattern_bound_params(args.n, args.m, args.k)
        D1, D2 = bounds.pattern_bound_params_derived(args.n, args.m, args.k)
        result.update(
            K1=K1,
            K2=K2,
            K1_derived=D1,
            K2_derived=D2,
            note="K1 uses denominator m!-2m+2; K1_derived uses m!-2m+1, "
            "which follows from the variance lower bound",
        )
        if args.t is not None:
            params = bounds.pattern_params(args.n, args.m, args.k, derived=False)
            t = _broadcast(args.t, args.k)
            result.update(t=t, lower=bounds.lower_tail_bound(params, t),
                          upper=bounds.upper_tail_bound(params, t))
        _emit(dumps(result), None)
        return EXIT_PASS

    if args.mu is None or args.K is None or args.t is None:
        raise UsageError("bounds needs --mu, --K and --t (or --pattern)")
    if args.univariate:
        lower, upper = bounds.univariate_bounds(args.mu[0], args.K, args.t[0])
        result.update(lower=lower, upper=upper)
    elif args.iid:
        if args.sigma is None:
            raise UsageError("--iid needs --sigma")
        k = args.k or len(args.t)
        t = _broadcast(args.t, k)
        lower, upper = bounds.iid_bounds(k, args.mu[0], args.sigma[0] ** 2, args.K, t)
        result.update(t=t, lower=lower, upper=upper)
    else:
        if args.sigma is None:
            raise UsageError("bounds needs --sigma")
        k = max(len(args.mu), len(args.sigma), len(args.t))
        mu, sigma, t = (_broadcast(v, k) for v in (args.mu, args.sigma, args.t))
        params = bounds.bound_params(mu, sigma, args.K)
        result.update(
            K1=params.K1,
            K2=params.K2,
            t=t,
            lower=bounds.lower_tail_bound(params, t),
            upper=bounds.upper_tail_bound(params, t),
        )
    _emit(dumps(result), None)
    return EXIT_PASS


def _broadcast(values: list[float], k: int) -> list[float]:
    if len(values) == k:
        return list(values)
    if len(values) == 1:
        return list(values) * k
    raise UsageError(f"vector of length {len(values)} does not match k={k}")


# oracle ------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    model = load_model(args.model)
    law = oracle.enumerate_law(model, workers=args.workers)
    mom = moments(law, check=False)
    grid = args.t_grid if args.t_grid is not None else list(DEFAULT_GRID)
    directions = [args.direction] if args.direction else range(1, model.k + 1)
    audits = [oracle.exact_coupling_audit(model, i, workers=args.workers) for i in directions]
    result: dict = {
        "model": model.to_json(),
        "law": law.to_json(),
        "moments": {"mu": mom.mu, "sigma2": mom.sigma2},
        "audits": [
            {
                "direction": a.direction,
                "size_biased": a.is_size_biased(law),
                "max_radius_sq": a.max_radius_sq,
                "max_radius": a.max_radius,
                "max_gap": list(a.max_gap),
                "law": a.law.to_json(),
            }
            for a in audits
        ],
    }
    ok = all(a.is_size_biased(law) for a in audits)
    if isinstance(model, PatternModel):
        result["pattern"] = {
            "mean_formula": pattern_mean(model.n, model.m),
            "variance_formula": [pattern_variance(model.n, t) for t in model.patterns],
            "variance_exact": [pattern_variance_exact(model.n, t) for t in model.patterns],
            "radius_bound": model.radius,
        }
    if isinstance(model, LocalDependenceModel):
        result["local"] = {
            "b": overlap_degree(model),
            "M": model.M,
            "radius": coupling_radius_local(model),
            "observed_max_statistic": observed_statistic_max(model),
        }
    if all(s > 0 for s in mom.sigma2) and all(m > 0 for m in mom.mu):
        check = oracle.check_bounds(model, [_broadcast([t / math.sqrt(model.k)], model.k) for t in grid],
                                    workers=args.workers)
        result["K"] = check.K
        result["tails"] = [
            {
                "t": list(r.t),
                "exact_lower": r.exact_lower,
                "bound_lower": r.bound_lower,
                "exact_upper": r.exact_upper,
                "bound_upper": r.bound_upper,
                "margin": r.margin,
            }
            for r in check.rows
        ]
        ok = ok and check.holds()
    result["verdict"] = "PASS" if ok else "FAIL"
    _emit(dumps(result), args.out)
    return EXIT_PASS if ok else EXIT_FAIL


# verify ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    model = load_model(args.model)
    cfg = McConfig(args.samples, args.seed, args.workers, args.z_tol)
    grid = args.t_grid if args.t_grid is not None else DEFAULT_GRID
    report = verify(model, cfg, grid, [args.direction] if args.direction else None)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


# patterns ------------------------------------------------------------------------


def cmd_patterns(args) -> int:
    if args.action == "count":
        pi, tau = as_permutation(args.perm), as_permutation(args.tau)
        result = {"count": count(pi, tau)}
    elif args.action == "moments":
        tau = as_permutation(args.tau)
        result = {
            "n": args.n,
            "tau": list(tau),
            "mean": pattern_mean(args.n, len(tau)),
            "variance_formula": pattern_variance(args.n, tau),
            "variance_exact": pattern_variance_exact(args.n, tau),
            "I": [relative_order_indicator(tau, j) for j in range(1, len(tau))],
        }
    else:
        pi, tau = as_permutation(args.perm), as_permutation(args.tau)
        if not 1 <= args.beta <= len(pi):
            raise UsageError(f"--beta must be in 1..{len(pi)}")
        result = {"reordered": list(reorder(pi, tau, args.beta))}
    _emit(dumps(result), None)
    return EXIT_PASS


# parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sizebias", description="Size-biased couplings and concentration bounds."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="evaluate tail bounds and constants")
    b.add_argument("--mu", type=_floats)
    b.add_argument("--sigma", type=_floats)
    b.add_argument("--K", type=float)
    b.add_argument("--t", type=_floats)
    mode = b.add_mutually_exclusive_group()
    mode.add_argument("--univariate", action="store_true", help="deviation-scale k=1 bounds")
    mode.add_argument("--iid", action="store_true", help="i.i.d. coordinates bounded by K")
    mode.add_argument("--pattern", action="store_true", help="pattern-count constants")
    b.add_argument("--n", type=int)
    b.add_argument("--m", type=int)
    b.add_argument("--k", type=int)
    b.set_defaults(func=cmd_bounds)

    def model_flags(p):
        p.add_argument("--model", required=True, help="JSON model spec")
        p.add_argument("--workers", type=_positive_int, default=_default_workers())
        p.add_argument("--t-grid", type=_floats, help="comma-separated ||t||_2 values")
        p.add_argument("--direction", type=_positive_int)
        p.add_argument("--out")

    o = sub.add_parser("oracle", help="exact enumeration audit")
    model_flags(o)
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", help="Monte Carlo verification")
    model_flags(v)
    v.add_argument("--seed", type=_seed, required=True)
    v.add_argument("--samples", type=_positive_int, default=100_000)
    v.add_argument("--z-tol", type=float, default=3.0)
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("patterns", help="pattern counting utilities")
    p.add_argument("action", choices=("count", "moments", "reorder"))
    p.add_argument("--perm", type=_ints)
    p.add_argument("--tau", type=_ints, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=int)
    p.set_defaults(func=cmd_patterns)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        if args.command == "patterns":
            needed = {"count": ("perm",), "moments": ("n",), "reorder": ("perm", "beta")}[args.action]
            missing = [f"--{f}" for f in needed if getattr(args, f) is None]
            if missing:
                raise UsageError(f"patterns {args.action} needs {' '.join(missing)}")
        return args.func(args)
    except MODEL_ERRORS as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (UsageError, NonPositiveInput, NegativeT, InvalidPatternDims, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
