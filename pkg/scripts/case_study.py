#!/usr/bin/env python3
"""Sonar/barometer fusion on a synthetic flight log (or a recorded one).

    python scripts/case_study.py                   # default synthetic log
    python scripts/case_study.py --log flight.csv  # time_s,truth_m,sonar_m,pressure_pa
"""

import argparse
import time

from sslfusion import harness, sensors


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--log")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    ap.add_argument("--sonar-sigma", type=float, default=sensors.SynthConfig.sonar_sigma_m)
    ap.add_argument("--pressure-sigma", type=float, default=sensors.SynthConfig.pressure_sigma_pa)
    args = ap.parse_args()

    if args.log:
        log = sensors.load_log(args.log)
    else:
        log = sensors.synthesize_log(
            sensors.SynthConfig(sonar_sigma_m=args.sonar_sigma, pressure_sigma_pa=args.pressure_sigma)
        )
    print(f"{len(log)} records, truth mean {log.truth_m.mean():.2f} m, sd {log.truth_m.std():.2f} m\n")
    print(f"{'primary':<10} {'MAE primary':>12} {'MAE secondary':>14} {'MAE fused':>10} {'success':>8}")
    for cue in ("sonar", "barometer"):
        t0 = time.perf_counter()
        cfg = harness.CaseStudyConfig(primary_cue=cue, k=args.k, runs=args.runs, seed=args.seed)
        rep = harness.run_case_study(log, cfg)
        print(
            f"{cue:<10} {rep.mae_primary:12.3f} {rep.mae_secondary:14.3f} {rep.mae_fused:10.3f} "
            f"{100 * rep.success_rate:7.0f}%   ({time.perf_counter() - t0:.1f} s)"
        )


if __name__ == "__main__":
    main()
