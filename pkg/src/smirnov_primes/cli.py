"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 capacity or domain error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import asymptotics as asy
from .harness import ExperimentConfig, emit_report, run_experiments
from .montecarlo import McAuditError, McConfig, q_mc
from .partitions import PartitionAuditError, audit_E, audit_lambda, build_E, build_lambda
from .prime_engine import (
    CapacityError,
    CountQuery,
    count_constrained,
    count_corollary,
)
from .smirnov_core import BoundaryQuery, q_exact, q_reflect_upper, q_steck

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number(text: str):
    """Decimal and ``p/q`` literals parse exactly; anything else as float."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def _out(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _cmd_q(args) -> int:
    q = BoundaryQuery(args.m, args.u, args.v)
    out = {"m": q.m, "u": str(q.u), "v": str(q.v), "w": str(q.w), "mode": args.mode}
    if args.mode in ("exact", "steck", "reflect"):
        fn = {"exact": q_exact, "steck": q_steck, "reflect": q_reflect_upper}[args.mode]
        res = fn(q)
        out.update(value=float(res.value), arithmetic=res.mode, abs_error_bound=float(res.abs_error_bound))
        if isinstance(res.value, Fraction):
            out["exact"] = str(res.value)
    elif args.mode == "mc":
        est = q_mc(q, McConfig(args.samples, args.seed, q.m))
        out.update(value=est.p_hat, stderr=est.stderr, samples=est.N, seed=est.seed)
    elif args.mode == "approx":
        out["value"] = asy.q_approx(q.m, float(q.u), float(q.w))
    else:
        out["value"] = asy.q_envelope(q.m, float(q.u), float(q.w))
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_sieve(args) -> int:
    beta = 0.0 if args.beta is None else float(args.beta)
    table = count_constrained(CountQuery(args.x, float(args.alpha), beta, args.constraint))
    if args.format == "json":
        doc = {"x": table.x, "params": table.params, "counts": {str(k): c for k, c in sorted(table.counts.items())}}
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["k", "count"])
        for k in sorted(table.counts):
            wr.writerow([k, table.counts[k]])
        text = buf.getvalue()
    _out(text, args.out)
    return EXIT_OK


def _cmd_corollary(args) -> int:
    beta = float(args.beta)
    count = count_corollary(args.x, beta, args.side)
    norm = (beta + 1) * args.x / math.sqrt(asy.loglog(args.x))
    doc = {"x": args.x, "beta": beta, "side": args.side, "count": count,
           "normalizer": norm, "ratio": count / norm}
    _out(json.dumps(doc, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _cmd_partitions(args) -> int:
    if args.lambda_j is not None:
        table = build_lambda(args.lambda_j)
        audit_lambda(table)
        _out(table.to_csv(), args.out)
    else:
        e = build_E(float(args.e_part_q))
        audit_E(e)
        _out(e.to_csv(), args.out)
    return EXIT_OK


def _load_configs(path) -> list[ExperimentConfig]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    items = data if isinstance(data, list) else [data]
    try:
        return [ExperimentConfig.from_dict(d) for d in items]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from None


def _cmd_experiment(args) -> int:
    cfgs = _load_configs(args.config)
    out = Path(args.out)
    for cfg, report in zip(cfgs, run_experiments(cfgs)):
        name = cfg.output_path or f"{cfg.kind}.{cfg.format}"
        path = emit_report(report, out / name, cfg.format)
        sys.stdout.write(f"{path}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smirnov-primes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("q", help="boundary-crossing probability Q_m(u, v)")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--u", type=_number, required=True)
    q.add_argument("--v", type=_number, required=True)
    q.add_argument("--mode", default="exact",
                   choices=["exact", "steck", "reflect", "mc", "approx", "envelope"])
    q.add_argument("--samples", type=int, default=10**6)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=_cmd_q)

    s = sub.add_parser("sieve", help="constrained counts by number of prime factors")
    s.add_argument("--x", type=int, required=True)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--constraint", choices=["lower", "upper", "none"], default="none")
    s.add_argument("--out", default=None)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=_cmd_sieve)

    c = sub.add_parser("corollary", help="one-sided omega(n, t) counts")
    c.add_argument("--x", type=int, required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--side", choices=["upper", "lower"], required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_corollary)

    pt = sub.add_parser("partitions", help="prime partitions by reciprocal mass")
    grp = pt.add_mutually_exclusive_group(required=True)
    grp.add_argument("--lambda-j", type=int, dest="lambda_j")
    grp.add_argument("--e-part-q", type=float, dest="e_part_q")
    pt.add_argument("--out", default=None)
    pt.set_defaults(func=_cmd_partitions)

    e = sub.add_parser("experiment", help="run experiment configs and write reports")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=_cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (McAuditError, PartitionAuditError, AssertionError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (CapacityError, ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
