"""Command-line front end: sample, calibrate, verify, shape, bench.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 retries exhausted, 4 bound violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import secrets
import sys
from contextlib import contextmanager
from dataclasses import asdict

import numpy as np

from . import analysis
from .bench import time_sampler
from .distributions import RandomStream
from .errors import BoundViolationError, RetriesExhaustedError, BoltzmannError
from .sampler import Bivariate, PowersetSample, Univariate, dominating_rate_total
from .structures import ConstantBound, PartLabel, make_builtin
from .tuning import (
    RejectionConfig,
    calibrate_numeric,
    calibrate_partitions,
    calibrate_squares,
    expected_length,
    expected_size,
    sample_with_rejection,
)
from .verification import run_suites

DEFAULT_SEED = 42
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RETRIES, EXIT_BOUND = 0, 1, 2, 3, 4


class ConfigError(Exception):
    pass


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _count(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _number_list(text: str) -> list:
    return [_number(t) for t in text.split(",") if t.strip()]


def _seed(text: str) -> int:
    if text == "random":
        return secrets.randbits(64)
    return _count(text)


# --- configuration ------------------------------------------------------------

def resolve_params(args, structure):
    """Boltzmann parameters from explicit weights or from calibration targets."""
    explicit = args.z is not None or args.z1 is not None or args.z2 is not None
    targets = args.target_size is not None or args.target_length is not None
    if explicit and targets:
        raise ConfigError("give either explicit weights (--z / --z1 --z2) or calibration targets, not both")
    if not explicit and not targets:
        if getattr(args, "mode", "free") != "free" and args.n is not None:
            args.target_size = float(args.n)
        else:
            raise ConfigError("no parameters: pass --z, --z1/--z2, or --target-size")
    if args.z is not None:
        if args.z1 is not None or args.z2 is not None:
            raise ConfigError("--z cannot be combined with --z1/--z2")
        return Univariate(args.z)
    if args.z1 is not None or args.z2 is not None:
        if args.z1 is None or args.z2 is None:
            raise ConfigError("bivariate weights need both --z1 and --z2")
        return Bivariate(args.z1, args.z2)
    if args.target_length is not None:
        if args.target_size is None:
            raise ConfigError("--target-length needs --target-size")
        if not isinstance(structure.bound, ConstantBound):
            raise ConfigError("length calibration is only available for constant-bounded structures")
        return calibrate_squares(args.target_size, args.target_length)
    if args.asymptotic:
        if structure.name != "naturals":
            raise ConfigError("--asymptotic calibration is only defined for 'naturals'")
        return Univariate(calibrate_partitions(args.target_size))
    return Univariate(calibrate_numeric(structure, args.target_size, args.rel_tol))


def resolve_rejection(args) -> RejectionConfig:
    kwargs = {}
    if args.max_attempts is not None:
        kwargs["max_attempts"] = args.max_attempts
    if args.mode == "free":
        return RejectionConfig.free()
    target = args.n if args.n is not None else args.target_size
    if target is None:
        raise ConfigError(f"{args.mode} mode needs --n")
    if target != int(target) or target < 1:
        raise ConfigError(f"size target must be a positive integer, got {target}")
    if args.mode == "exact":
        return RejectionConfig.exact(int(target), **kwargs)
    if args.epsilon is None:
        raise ConfigError("approx mode needs --epsilon")
    return RejectionConfig.approximate(int(target), args.epsilon, **kwargs)


def params_dict(params) -> dict:
    return asdict(params)


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# --- records ------------------------------------------------------------------

def sample_record(sample: PowersetSample, attempts: int = 1) -> dict:
    return {
        "parts": [{"level": p.level, "rank": p.rank} for p in sample.sorted_parts()],
        "size": sample.size,
        "length": sample.length,
        "attempts": attempts,
    }


def record_sample(record: dict) -> PowersetSample:
    return PowersetSample(frozenset(PartLabel(p["level"], p["rank"]) for p in record["parts"]))


# --- subcommands -------------------------------------------------------------

def cmd_sample(args) -> int:
    if args.count < 0:
        raise ConfigError("--count must be non-negative")
    structure = make_builtin(args.structure)
    params = resolve_params(args, structure)
    config = resolve_rejection(args)
    rng = RandomStream(args.seed)
    header = {
        "type": "header",
        "structure": structure.name,
        "params": params_dict(params),
        "seed": args.seed,
        "mode": config.mode,
        "window": config.window(),
        "count": args.count,
    }
    records = []
    for _ in range(args.count):
        sample, attempts = sample_with_rejection(structure, params, config, rng)
        records.append(sample_record(sample, attempts))
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(json.dumps(header) + "\n")
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
        else:
            fh.write("# " + json.dumps(header) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["size", "length", "attempts", "parts"])
            for rec in records:
                parts = ";".join(f"{p['level']}:{p['rank']}" for p in rec["parts"])
                writer.writerow([rec["size"], rec["length"], rec["attempts"], parts])
    return EXIT_OK


def cmd_calibrate(args) -> int:
    structure = make_builtin(args.structure)
    params = resolve_params(args, structure)
    out = {
        "structure": structure.name,
        "params": params_dict(params),
        "lambda_bar": dominating_rate_total(structure, params),
        "expected_size": expected_size(structure, params),
        "expected_length": expected_length(structure, params),
    }
    with _output(args.out) as fh:
        fh.write(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    counts = {}
    if args.count is not None:
        if args.count <= 0:
            raise ConfigError("--count must be positive")
        counts = {"marginal_count": args.count, "oracle_count": args.count, "exact_count": args.count}
    seeds = (args.seed, args.seed + 1, args.seed + 2)
    results = run_suites(seeds, acceptance_scale=args.acceptance_scale, suites=args.suite, **counts)
    ok = all(r.passed for r in results)
    report = {"passed": ok, "seeds": list(seeds), "suites": [r.to_dict() for r in results]}
    with _output(args.out) as fh:
        fh.write(json.dumps(report, indent=2, default=float) + "\n")
    for r in results:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_shape(args) -> int:
    structure = make_builtin(args.structure)
    params = resolve_params(args, structure)
    sample = sample_with_rejection(structure, params, RejectionConfig.free(), RandomStream(args.seed))[0]
    diagram = analysis.young_diagram(sample)
    if diagram.total_size == 0:
        raise ConfigError("sampled diagram is empty; rescaling is undefined")
    if structure.name == "squares":
        if not isinstance(params, Bivariate):
            raise ConfigError("the squares limit shape needs bivariate parameters")
        e_n = args.target_size or expected_size(structure, params)
        e_m = args.target_length or expected_length(structure, params)
        kind = "gamma_survival"
        curve = analysis.rescale_diagram(diagram, "bivariate", expected_size=e_n, expected_length=e_m)
        raw_x = lambda x: np.asarray(x) * 2.0 * e_n / e_m
        y_scale = 1.0 / e_m
    elif structure.name == "naturals":
        kind = "vershik"
        curve = analysis.rescale_diagram(diagram, "sqrt_size")
        root = math.sqrt(diagram.total_size)
        raw_x = lambda x: np.asarray(x) * root
        y_scale = 1.0 / root
    else:
        raise ConfigError(f"no limit shape known for {structure.name!r}")
    distance = analysis.sup_distance(curve, kind)
    grid = np.linspace(0.0, float(curve[:, 0].max()) * 1.05, args.grid)
    sampled = np.column_stack((grid, diagram(raw_x(grid)) * y_scale))
    limit = np.column_stack((grid, analysis.limit_shape(kind, grid)))
    prefix = args.out or "shape"
    files = [f"{prefix}.sample.csv", f"{prefix}.limit.csv"]
    analysis.write_curve_csv(sampled, files[0])
    analysis.write_curve_csv(limit, files[1])
    summary = {"structure": structure.name, "params": params_dict(params), "seed": args.seed,
               "size": sample.size, "length": sample.length, "limit_shape": kind,
               "sup_distance": distance, "files": files}
    print(json.dumps(summary, indent=2))
    return EXIT_OK


DEFAULT_TARGETS = {"free": [1e3, 1e6, 1e9], "exact": [1e2, 1e3, 1e4], "approx": [1e3, 1e6]}


def cmd_bench(args) -> int:
    structure = make_builtin(args.structure)
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    targets = args.targets or DEFAULT_TARGETS[args.mode]
    lengths = args.target_length_list or [None]
    rows = []
    for target in targets:
        for length in lengths:
            ns = argparse.Namespace(**vars(args))
            ns.z = ns.z1 = ns.z2 = None
            ns.target_size, ns.target_length = target, length
            ns.n = int(target) if args.mode != "free" else None
            params = resolve_params(ns, structure)
            config = resolve_rejection(ns)
            t = time_sampler(structure, params, config, RandomStream(args.seed), args.repeats, args.warmup)
            rows.append({"target": f"{target:g}", "target_length": "" if length is None else f"{length:g}",
                         "mode": args.mode, "mean_ms": t.mean_ms, "stddev_ms": t.stddev_ms,
                         "p10_ms": t.p10_ms, "p90_ms": t.p90_ms, "mean_attempts": t.mean_attempts})
    with _output(args.out) as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def _add_common(p, *, params=True):
    p.add_argument("--structure", default="naturals",
                   help="naturals | naturals0 | squares | words:k | pointed (default: naturals)")
    if params:
        p.add_argument("--z", type=_number)
        p.add_argument("--z1", type=_number)
        p.add_argument("--z2", type=_number)
        p.add_argument("--target-size", type=_number)
        p.add_argument("--target-length", type=_number)
        p.add_argument("--asymptotic", action="store_true",
                       help="for naturals, use the closed-form partition calibration instead of the exact series")
        p.add_argument("--rel-tol", type=_number, default=1e-4)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="integer or 'random' (default: 42)")
    p.add_argument("--out", help="output path (default: stdout)")


def _add_rejection(p):
    p.add_argument("--mode", choices=["free", "approx", "exact"], default="free")
    p.add_argument("--n", type=_count, help="size target for approx/exact modes")
    p.add_argument("--epsilon", type=_number)
    p.add_argument("--max-attempts", type=_count)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pset-boltzmann", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw samples as JSON lines or CSV")
    _add_common(p)
    _add_rejection(p)
    p.add_argument("--count", type=_count, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("calibrate", help="report parameters, lambda_bar and exact moments")
    _add_common(p)
    p.add_argument("--mode", default="free", help=argparse.SUPPRESS)
    p.add_argument("--n", type=_count, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("verify", help="run the statistical verification suites")
    _add_common(p, params=False)
    p.add_argument("--count", type=_count, help="samples per suite and seed (default: suite-specific)")
    p.add_argument("--suite", action="append", choices=["marginal", "covariance", "oracle", "uniformity"])
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--acceptance-scale", type=_number, default=1.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("shape", help="rescaled Young diagram vs limit shape, as CSV")
    _add_common(p)
    p.add_argument("--grid", type=_count, default=1000)
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--mode", default="free", help=argparse.SUPPRESS)
    p.add_argument("--n", type=_count, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_shape)

    p = sub.add_parser("bench", help="wall-clock benchmark table as CSV")
    _add_common(p, params=False)
    _add_rejection(p)
    p.add_argument("--targets", type=_number_list, help="comma-separated expected sizes")
    p.add_argument("--target-length", dest="target_length_list", type=_number_list,
                   help="comma-separated expected lengths (squares)")
    p.add_argument("--asymptotic", action="store_true")
    p.add_argument("--rel-tol", type=_number, default=1e-4)
    p.add_argument("--repeats", type=_count, default=100)
    p.add_argument("--warmup", type=_count, default=3)
    p.add_argument("--format", choices=["csv"], default="csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except RetriesExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RETRIES
    except BoundViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (ConfigError, BoltzmannError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
