#!/usr/bin/env python3
"""Monte Carlo check of the closed-form errors for the four reference triples.

    python scripts/reproduce_table1.py --n 10000 --seed 20170901
"""

import argparse

from sslfusion import harness, theory
from sslfusion.model import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    args = ap.parse_args()

    print(f"{'st2':>5} {'sg2':>4} {'sf2':>5} | {'primary':>8} {'(theory)':>8} | {'fused':>8} {'(theory)':>8} | {'+-SE':>6}")
    for row in harness.table1(args.n, args.seed):
        st2, sg2, sf2 = row.params.as_tuple()
        print(
            f"{st2:5.2f} {sg2:4.0f} {sf2:5.0f} | {row.mse_primary_empirical:8.3f} {row.mse_primary_theory:8.2f} | "
            f"{row.mse_fused_empirical:8.3f} {row.mse_fused_theory:8.3f} | {row.mse_fused_se:6.3f}"
        )
    c = theory.sigma_f2_threshold(6.25, 1.0)
    print(f"\nfusion stops helping at (6.25, 1) once sigma_f2 > {c:.4f}"
          f" (learned-cue variance > {theory.sigma_yf2_threshold(6.25, 1.0):.4f})")
    print(f"all-knowing MAP error at (6.25, 1, 1): {1 / (1 / 6.25 + 1 + 1):.4f}"
          f" vs fused {theory.expected_error_fused(ModelParams(6.25, 1, 1)):.4f}")


if __name__ == "__main__":
    main()
