"""Command-line front end.

Exit codes: 0 success, 1 numerical or harness failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import estimation as est
from . import harness, theory
from .model import ModelParams, ParameterError
from .rng import DEFAULT_SEED
from .sensors import (
    LogFormatError,
    SynthConfig,
    calibrate,
    load_log,
    pressure_to_height,
    synthesize_log,
)

SCHEMA_VERSION = 1

DEFAULTS = {
    "n": 10_000,
    "runs": 100,
    "k": 3,
    "splits": (0.8, 0.1, 0.1),
    "window": est.DEFAULT_WINDOW,
    "seed": DEFAULT_SEED,
    "format": "json",
}


class UsageError(Exception):
    """Bad flags, config or input files (exit code 2)."""


# ---------------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "unbounded"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dump_json(kind: str, payload) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "result": _jsonable(payload)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return "unbounded" if math.isinf(v) else f"{v:.6g}"
    return str(v)


def text_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- config


def _load_config(path: str | None, allowed: set[str]) -> dict:
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: top level must be an object")
    unknown = set(cfg) - allowed
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    return cfg


def _resolve(args: argparse.Namespace, cfg: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg:
        return cfg[key]
    return DEFAULTS[key]


def _triple(text) -> tuple[float, float, float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from exc
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected three values, got {len(values)}")
    return values


def _pair(text) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in str(text).split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}") from exc
    return lo, hi


def _params(values) -> ModelParams:
    try:
        return ModelParams(*values)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------- commands


def cmd_theory(args: argparse.Namespace) -> str:
    report = theory.theory_report(_params((args.sigma_t2, args.sigma_g2, args.sigma_f2)))
    fmt = args.format or DEFAULTS["format"]
    d = report.to_dict()
    if fmt == "json":
        return dump_json("theory", d)
    rows = [[k, v] for k, v in asdict(report).items()]
    if fmt == "csv":
        return csv_text(["quantity", "value"], rows)
    return text_table(["quantity", "value"], rows)


_ROW_HEADER = [
    "sigma_t2", "sigma_g2", "sigma_f2", "n",
    "mse_primary", "theory_primary", "mse_fused", "theory_fused",
]


def _rows_out(kind: str, rows: list[harness.VerificationRow], fmt: str) -> str:
    if fmt == "json":
        payload = [r.to_dict() for r in rows]
        return dump_json(kind, payload if kind == "table1" else payload[0])
    table = [
        [*r.params.as_tuple(), r.n, r.mse_primary_empirical, r.mse_primary_theory,
         r.mse_fused_empirical, r.mse_fused_theory]
        for r in rows
    ]
    if fmt == "csv":
        return csv_text(_ROW_HEADER, table)
    return text_table(_ROW_HEADER, table)


def cmd_verify(args: argparse.Namespace) -> str:
    cfg = _load_config(args.config, {"n", "seed", "window", "format"})
    params = _params((args.sigma_t2, args.sigma_g2, args.sigma_f2))
    row = harness.verify_theory(
        params,
        int(_resolve(args, cfg, "n")),
        int(_resolve(args, cfg, "seed")),
        window=tuple(_resolve(args, cfg, "window")),
    )
    return _rows_out("verify", [row], _resolve(args, cfg, "format"))


def cmd_table1(args: argparse.Namespace) -> str:
    cfg = _load_config(args.config, {"n", "seed", "format"})
    rows = harness.table1(int(_resolve(args, cfg, "n")), int(_resolve(args, cfg, "seed")))
    return _rows_out("table1", rows, _resolve(args, cfg, "format"))


def cmd_synth(args: argparse.Namespace) -> str:
    cfg = {}
    if args.config:
        cfg = _load_config(args.config, set(SynthConfig().to_dict()))
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        config = SynthConfig.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"synth config: {exc}") from exc
    buf = io.StringIO()
    synthesize_log(config).write_csv(buf)
    return buf.getvalue()


def _read_log(path: str):
    try:
        return load_log(path)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    except LogFormatError as exc:
        raise UsageError(str(exc)) from exc


def cmd_casestudy(args: argparse.Namespace) -> str:
    cfg = _load_config(args.config, {"primary", "runs", "k", "splits", "seed", "format"})
    log = _read_log(args.log)
    primary = args.primary or cfg.get("primary", "both")
    cues = ["sonar", "barometer"] if primary == "both" else [primary]
    try:
        configs = [
            harness.CaseStudyConfig(
                primary_cue=cue,
                k=int(_resolve(args, cfg, "k")),
                splits=_triple(_resolve(args, cfg, "splits")),
                runs=int(_resolve(args, cfg, "runs")),
                seed=int(_resolve(args, cfg, "seed")),
            )
            for cue in cues
        ]
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from exc
    reports = [harness.run_case_study(log, c) for c in configs]
    fmt = _resolve(args, cfg, "format")
    if fmt == "json":
        return dump_json("casestudy", [r.to_dict() for r in reports])
    if fmt == "csv":
        rows = [
            [r.config.primary_cue, run.run, run.sigma_g2, run.s_hat,
             run.mae_primary, run.mae_secondary, run.mae_fused, int(run.success)]
            for r in reports for run in r.runs
        ]
        header = ["primary", "run", "sigma_g2", "s_hat", "mae_primary", "mae_secondary", "mae_fused", "success"]
        return csv_text(header, rows)
    rows = [
        [r.config.primary_cue, r.mae_primary, r.mae_secondary, r.mae_fused, f"{100 * r.success_rate:.0f}%"]
        for r in reports
    ]
    return text_table(["primary", "mae_primary", "mae_secondary", "mae_fused", "success"], rows)


QUANTITIES = ("truth", "sonar_error", "barometer_error")


def _analysis_values(path: str, quantity: str) -> np.ndarray:
    p = Path(path)
    try:
        first = p.open().readline()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    if "time_s" in first:
        log = _read_log(path)
        if quantity == "truth":
            return log.truth_m
        if quantity == "sonar_error":
            return log.sonar_m - log.truth_m
        raw = pressure_to_height(log.pressure_pa)
        return calibrate(raw, log.truth_m).apply(raw) - log.truth_m
    values = []
    with p.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip().split(",")[0]
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise UsageError(f"{path}:{lineno}: cannot parse {text!r}") from None
    return np.asarray(values)


def cmd_analyze(args: argparse.Namespace) -> str:
    values = _analysis_values(args.path, args.quantity)
    try:
        stats = harness.analyze_distribution(
            values,
            args.bins,
            reps=args.reps,
            seed=args.seed if args.seed is not None else DEFAULT_SEED,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.hist_out:
        rows = [
            [lo, hi, c]
            for lo, hi, c in zip(stats.hist_edges[:-1], stats.hist_edges[1:], stats.hist_counts)
        ]
        Path(args.hist_out).write_text(csv_text(["bin_lo", "bin_hi", "count"], rows))
    fmt = args.format or DEFAULTS["format"]
    if fmt == "json":
        return dump_json("analyze", stats.to_dict())
    rows = [[k, getattr(stats, k)] for k in ("n", "mean", "std", "chi_square", "chi_square_bins", "p_value", "reps")]
    if fmt == "csv":
        return csv_text(["quantity", "value"], rows)
    return text_table(["quantity", "value"], rows)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sslfusion",
        description="Fusion of a primary cue with a self-supervised secondary cue.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=True, fmt=True, config=True):
        if seed:
            p.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULT_SEED})")
        if fmt:
            p.add_argument("--format", choices=["json", "text", "csv"], help="output format (default json)")
        p.add_argument("--out", help="write output here instead of stdout")
        if config:
            p.add_argument("--config", help="JSON config; explicit flags take precedence")

    def variances(p):
        p.add_argument("sigma_t2", type=float, help="target prior variance")
        p.add_argument("sigma_g2", type=float, help="primary-cue noise variance")
        p.add_argument("sigma_f2", type=float, help="secondary-cue noise variance")

    p = sub.add_parser("theory", help="closed-form predictions and thresholds")
    variances(p)
    common(p, seed=False, config=False)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("verify", help="Monte Carlo check of one parameter triple")
    variances(p)
    p.add_argument("--n", type=int, help=f"samples (default {DEFAULTS['n']})")
    p.add_argument("--window", type=_pair, help="x_g interval for the variance proxy (default -0.05,0.05)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table1", help="Monte Carlo check of the four reference triples")
    p.add_argument("--n", type=int, help=f"samples per row (default {DEFAULTS['n']})")
    common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("synth", help="write a synthetic sonar/barometer flight log")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--config", help="JSON generator config")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("casestudy", help="repeated split/learn/fuse experiments on a log")
    p.add_argument("log", help="sensor log CSV (time_s,truth_m,sonar_m,pressure_pa)")
    p.add_argument("--primary", choices=["sonar", "barometer", "both"], help="primary cue (default both)")
    p.add_argument("--runs", type=int, help=f"experiments per condition (default {DEFAULTS['runs']})")
    p.add_argument("--k", type=int, help=f"kNN neighbours (default {DEFAULTS['k']})")
    p.add_argument("--splits", type=_triple, help="train,validation,test fractions (default 0.8,0.1,0.1)")
    common(p)
    p.set_defaults(func=cmd_casestudy)

    p = sub.add_parser("analyze", help="normality check with a randomization test")
    p.add_argument("path", help="sensor log CSV, or one value per line")
    p.add_argument("--quantity", choices=QUANTITIES, default="sonar_error", help="what to take from a log (default sonar_error)")
    p.add_argument("--bins", type=int, help="chi-square cells (default max(5, n//50), at most 50)")
    p.add_argument("--reps", type=int, default=harness.RANDOMIZATION_REPS, help="simulated samples (default 10000)")
    p.add_argument("--hist-out", help="write histogram CSV here")
    common(p, config=False)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except UsageError as exc:
        print(f"sslfusion: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"sslfusion: failed: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
