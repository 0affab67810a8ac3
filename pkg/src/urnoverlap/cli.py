"""Command-line entry point.

Exit codes: 0 on success, 1 on a failed validation or invalid input,
2 on a malformed input file (and on bad command-line usage, as argparse does).
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ParseError, UrnOverlapError
from .estimator import theta_hat_all
from .heuristics import derivative_at_ny, discrete_derivative, rho_regression
from .io import DEFAULT_MIN_DEPTH, Envelope, curve_export, filter_min_depth, pairwise_matrices, read_count_table
from .oracle import UrnPair
from .simulation import monte_carlo
from .summaries import summarize_pair
from .validation import run_validation
from .variance import stderr_at_ny

log = logging.getLogger("urnoverlap")

THREADS_ENV = "URNOVERLAP_THREADS"
URN_TOL = 1e-9


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return 1


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _load_pair(args):
    table = read_count_table(args.table)
    return table.sample(args.x), table.sample(args.y)


def cmd_pairwise(args):
    table = filter_min_depth(read_count_table(args.table), args.min_depth, strict=args.strict_depth)
    results = pairwise_matrices(table, workers=_threads(args))
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    for name, res in results.items():
        with open(out / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
            res.to_csv(fh)
    if args.json:
        meta = {
            "source": str(args.table),
            "min_depth": args.min_depth,
            "strict_depth": args.strict_depth,
            "depths": dict(zip(table.sample_ids, table.depths.tolist())),
        }
        data = {name: {"sample_ids": res.sample_ids, "matrix": res.matrix} for name, res in results.items()}
        with open(out / "pairwise.json", "w", encoding="utf-8") as fh:
            Envelope("pairwise", data, meta).dump(fh)
    log.info("wrote %d x %d matrices to %s", len(table.sample_ids), len(table.sample_ids), out)
    return 0


def cmd_curve(args):
    x, y = _load_pair(args)
    stream, close = _open_out(args.output)
    try:
        curve_export(x, y, stream)
    finally:
        if close:
            stream.close()
    return 0


def cmd_heuristics(args):
    x, y = _load_pair(args)
    s = summarize_pair(x, y)
    series = theta_hat_all(s)
    report = rho_regression(series, args.k_lo, args.k_hi)
    th = float(series.theta[-1])
    se = float(stderr_at_ny(th, s.n_x))
    data = {
        "x": args.x,
        "y": args.y,
        "n_x": s.n_x,
        "n_y": s.n_y,
        "theta_hat_ny": th,
        "stderr_ny": se,
        "relative_stderr": se / th if th > 0 else math.nan,
        "derivative_at_ny": derivative_at_ny(series),
        "discrete_derivative": discrete_derivative(series),
        "regression": report.to_dict(),
    }
    stream, close = _open_out(args.output)
    try:
        Envelope("heuristics", data, {"source": str(args.table)}).dump(stream)
    finally:
        if close:
            stream.close()
    return 0


def _load_urns(path):
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno) from None
    if not isinstance(spec, dict) or not {"x", "y"} <= set(spec):
        raise ParseError(f"{path}: expected an object with 'x' and 'y' probability maps")
    try:
        return UrnPair(spec["x"], spec["y"], tol=URN_TOL)
    except (TypeError, AttributeError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def cmd_simulate(args):
    u = _load_urns(args.urns)
    ks = args.k or [args.ny]
    reports = monte_carlo(u, args.nx, args.ny, ks, args.replicates, args.seed, workers=_threads(args))
    meta = {"urns": u.to_dict(), "n_x": args.nx, "n_y": args.ny, "seed": args.seed, "conditions": u.conditions()}
    stream, close = _open_out(args.output)
    try:
        Envelope("monte_carlo", [r.to_dict() for r in reports], meta).dump(stream)
    finally:
        if close:
            stream.close()
    return 0


def cmd_validate(args):
    results = run_validation(seed=args.seed, n_pairs=args.pairs)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser():
    p = argparse.ArgumentParser(prog="urnoverlap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def threads(sp):
        sp.add_argument("--threads", type=int, default=None, help=f"worker count (env {THREADS_ENV} otherwise)")

    sp = sub.add_parser("pairwise", help="theta, stderr and dderiv matrices at k = n_y for all sample pairs")
    sp.add_argument("table", help="tab-delimited OTU count table")
    sp.add_argument("--min-depth", type=int, default=DEFAULT_MIN_DEPTH, help="drop samples with fewer draws")
    sp.add_argument("--strict-depth", action="store_true", help="require depth strictly above --min-depth")
    sp.add_argument("--output", "-o", help="output directory (default: current)")
    sp.add_argument("--json", action="store_true", help="also write pairwise.json with metadata")
    threads(sp)
    sp.set_defaults(func=cmd_pairwise)

    for name, func, help_ in (
        ("curve", cmd_curve, "per-k estimate and jackknife CSV for one ordered pair"),
        ("heuristics", cmd_heuristics, "convergence diagnostics for one ordered pair"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("table", help="tab-delimited OTU count table")
        sp.add_argument("--x", required=True, help="sample id playing urn x")
        sp.add_argument("--y", required=True, help="sample id playing urn y")
        sp.add_argument("--output", "-o", help="output file (default: stdout)")
        if name == "heuristics":
            sp.add_argument("--k-lo", type=int, default=None, help="first k of the regression window")
            sp.add_argument("--k-hi", type=int, default=None, help="last k of the regression window")
        sp.set_defaults(func=func)

    sp = sub.add_parser("simulate", help="Monte Carlo check against exact urn quantities")
    sp.add_argument("urns", help='JSON file {"x": {color: p, ...}, "y": {...}}')
    sp.add_argument("--nx", type=int, required=True)
    sp.add_argument("--ny", type=int, required=True)
    sp.add_argument("--k", type=int, action="append", help="k to report (repeatable; default n_y)")
    sp.add_argument("--replicates", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", help="output file (default: stdout)")
    threads(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="check closed forms against brute-force and exact oracles")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--pairs", type=int, default=200, help="random sample pairs to test")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"urnoverlap: parse error: {exc}", file=sys.stderr)
        return 2
    except (UrnOverlapError, OSError) as exc:
        print(f"urnoverlap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
