"""Timing tables for free, exact and bivariate sampling.

Absolute times depend on the machine; the point is the scaling. Free sampling
should grow like sqrt(target) (ratio ~31.6 between 1e6 and 1e9), and at a
fixed size the squares sampler should slow down as the mean length grows.

    python scripts/reproduce_tables.py --repeats 50
"""

import argparse
import csv
import sys

from powerset_boltzmann.bench import time_sampler
from powerset_boltzmann.distributions import RandomStream
from powerset_boltzmann.sampler import Univariate
from powerset_boltzmann.structures import naturals, squares
from powerset_boltzmann.tuning import RejectionConfig, calibrate_numeric, calibrate_partitions, calibrate_squares


def free_table(repeats, seed):
    for target in (1e3, 1e6, 1e9):
        params = Univariate(calibrate_partitions(target))
        t = time_sampler(naturals(), params, RejectionConfig.free(), RandomStream(seed), repeats)
        yield {"table": "free", "target": target, "length": "", "mean_ms": t.mean_ms, "p10_ms": t.p10_ms,
               "p90_ms": t.p90_ms, "attempts": t.mean_attempts}


def exact_table(repeats, seed):
    for target in (100, 1000, 10_000):
        params = Univariate(calibrate_numeric(naturals(), target, 1e-4))
        t = time_sampler(naturals(), params, RejectionConfig.exact(target), RandomStream(seed), repeats)
        yield {"table": "exact", "target": target, "length": "", "mean_ms": t.mean_ms, "p10_ms": t.p10_ms,
               "p90_ms": t.p90_ms, "attempts": t.mean_attempts}


def squares_table(repeats, seed):
    for length in (5, 10, 15, 20):
        params = calibrate_squares(1e6, length)
        t = time_sampler(squares(), params, RejectionConfig.free(), RandomStream(seed), repeats)
        yield {"table": "squares", "target": 1e6, "length": length, "mean_ms": t.mean_ms, "p10_ms": t.p10_ms,
               "p90_ms": t.p90_ms, "attempts": t.mean_attempts}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--skip-exact", action="store_true", help="exact sampling at 1e4 takes a while")
    args = ap.parse_args()

    writer = csv.DictWriter(sys.stdout, ["table", "target", "length", "mean_ms", "p10_ms", "p90_ms", "attempts"],
                            lineterminator="\n")
    writer.writeheader()
    rows = list(free_table(args.repeats, args.seed))
    if not args.skip_exact:
        rows += list(exact_table(max(1, args.repeats // 10), args.seed))
    rows += list(squares_table(args.repeats, args.seed))
    for row in rows:
        writer.writerow({k: f"{v:.4g}" if isinstance(v, float) else v for k, v in row.items()})

    free = {r["target"]: r["mean_ms"] for r in rows if r["table"] == "free"}
    print(f"# free-sampler ratio time(1e9)/time(1e6) = {free[1e9] / free[1e6]:.1f} (sqrt(1000) = 31.6)",
          file=sys.stderr)


if __name__ == "__main__":
    main()
