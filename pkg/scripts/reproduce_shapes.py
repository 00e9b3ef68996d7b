"""Rescaled Young diagrams against their limit shapes, written as CSV.

Strict partitions of mean size 1e6 are compared with the Vershik curve;
partitions into distinct squares with mean size 1e9 (or 1e12) and mean length
50 (or 100) with the gamma(1/2) survival function. A summary of sup distances
over many seeds goes to stderr.

    python scripts/reproduce_shapes.py --out-dir shapes --runs 20
"""

import argparse
import math
import pathlib
import sys

import numpy as np

from powerset_boltzmann.analysis import limit_shape, rescale_diagram, sup_distance, write_curve_csv, young_diagram
from powerset_boltzmann.distributions import RandomStream
from powerset_boltzmann.sampler import Univariate, sample_batch
from powerset_boltzmann.structures import naturals, squares
from powerset_boltzmann.tuning import calibrate_numeric, calibrate_squares


def partitions(runs, seed):
    z = calibrate_numeric(naturals(), 1e6)
    batch = sample_batch(naturals(), Univariate(z), RandomStream(seed), runs)
    return [rescale_diagram(young_diagram(s), "sqrt_size") for s in batch.samples()], "vershik"


def squares_run(runs, seed, size, length, realised):
    batch = sample_batch(squares(), calibrate_squares(size, length), RandomStream(seed), runs)
    curves = []
    for s in batch.samples():
        d = young_diagram(s)
        if d.total_length == 0:
            continue
        e_n, e_m = (d.total_size, d.total_length) if realised else (size, length)
        curves.append(rescale_diagram(d, "bivariate", expected_size=e_n, expected_length=e_m))
    return curves, "gamma_survival"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="shapes")
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    experiments = {
        "partitions_1e6": partitions(args.runs, args.seed),
        "squares_1e9_50": squares_run(args.runs, args.seed, 1e9, 50, False),
        "squares_1e9_50_realised": squares_run(args.runs, args.seed, 1e9, 50, True),
        "squares_1e12_100": squares_run(args.runs, args.seed, 1e12, 100, False),
    }
    for name, (curves, kind) in experiments.items():
        dists = np.array([sup_distance(c, kind) for c in curves])
        write_curve_csv(curves[0], out / f"{name}.sample.csv")
        grid = np.linspace(0, float(curves[0][:, 0].max()) * 1.05, 500)
        write_curve_csv(np.column_stack((grid, limit_shape(kind, grid))), out / f"{name}.limit.csv")
        print(f"{name}: median sup distance {np.median(dists):.3f}, "
              f"under 0.08: {np.mean(dists < 0.08):.0%}, under 0.1: {np.mean(dists < 0.1):.0%}", file=sys.stderr)


if __name__ == "__main__":
    main()
