#!/usr/bin/env python3
"""Normality of the truth and cue errors, sonar as primary, on one split.

Writes histogram CSVs next to --out-prefix for plotting elsewhere.
"""

import argparse

import numpy as np

from sslfusion import estimation as est
from sslfusion import harness, sensors


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    ap.add_argument("--reps", type=int, default=harness.RANDOMIZATION_REPS)
    ap.add_argument("--out-prefix")
    args = ap.parse_args()

    log = sensors.synthesize_log()
    train, _, test = harness.split_indices(len(log), (0.8, 0.1, 0.1), args.seed, 0)
    knn = est.fit_knn(log.pressure_pa[train], log.sonar_m[train], 3)
    y_f = knn.predict(log.pressure_pa[test])
    t = log.truth_m[test]
    series = {
        "t": t,
        "x_g - t": log.sonar_m[test] - t,
        "y_f - t": y_f - t,
    }
    print(f"{'variable':<8} {'mean':>7} {'sd':>6} {'chi2':>8} {'bins':>5} {'p':>7}")
    for name, values in series.items():
        d = harness.analyze_distribution(values, reps=args.reps, seed=args.seed)
        print(f"{name:<8} {d.mean:7.3f} {d.std:6.3f} {d.chi_square:8.2f} {d.chi_square_bins:5d} {d.p_value:7.4f}")
        if args.out_prefix:
            slug = name.replace(" ", "").replace("-", "_minus_")
            np.savetxt(
                f"{args.out_prefix}{slug}.csv",
                np.column_stack([d.hist_edges[:-1], d.hist_edges[1:], d.hist_counts]),
                delimiter=",", header="bin_lo,bin_hi,count", comments="",
            )


if __name__ == "__main__":
    main()
