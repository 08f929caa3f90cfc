"""Monte Carlo verification, the sonar/barometer protocol, and distribution checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from . import estimation as est
from . import theory
from .model import ModelParams, draw
from .rng import DEFAULT_SEED, PURPOSE_NULL, PURPOSE_SPLIT, substream
from .sensors import SensorLog, calibrate, pressure_to_height

TABLE1_PARAMS = (
    ModelParams(6.25, 1.0, 1.0),
    ModelParams(6.25, 1.0, 16.0),
    ModelParams(0.25, 1.0, 1.0),
    ModelParams(0.25, 1.0, 100.0),
)

RANDOMIZATION_REPS = 10_000


# ---------------------------------------------------------------- Table 1


@dataclass(frozen=True)
class VerificationRow:
    params: ModelParams
    n: int
    seed: int
    a_hat: float
    s_hat: float
    mse_primary_empirical: float
    mse_primary_theory: float
    mse_primary_se: float
    mse_fused_empirical: float
    mse_fused_theory: float
    mse_fused_se: float

    def to_dict(self) -> dict:
        return asdict(self)


def verify_theory(
    params: ModelParams,
    n: int = 10_000,
    seed: int = DEFAULT_SEED,
    *,
    window: tuple[float, float] = est.DEFAULT_WINDOW,
    index: int = 0,
) -> VerificationRow:
    """Simulate the robot on ``n`` draws and compare its errors with theory.

    The standard errors are those of the mean of the per-sample squared errors;
    they ignore the (smaller) variability of the fitted slope and proxy.
    """
    if n < 100:
        raise ValueError(f"n must be >= 100, got {n}")
    data = draw(params, n, seed, index=index)
    f = est.fit_linear(data.x_f, data.x_g)
    y_f = f.predict(data.x_f)
    s_hat = est.estimate_conditional_variance_windowed(y_f, data.x_g, window)
    model = est.FusionModel(params.sigma_g2, max(s_hat, est.VAR_FLOOR), f)
    fused = est.fuse(model, y_f, data.x_g)
    sq_primary = (data.x_g - data.t) ** 2
    sq_fused = (fused - data.t) ** 2
    return VerificationRow(
        params=params,
        n=n,
        seed=seed,
        a_hat=f.a,
        s_hat=s_hat,
        mse_primary_empirical=float(sq_primary.mean()),
        mse_primary_theory=theory.expected_error_primary(params),
        mse_primary_se=float(sq_primary.std(ddof=1) / math.sqrt(n)),
        mse_fused_empirical=float(sq_fused.mean()),
        mse_fused_theory=theory.expected_error_fused(params),
        mse_fused_se=float(sq_fused.std(ddof=1) / math.sqrt(n)),
    )


def table1(n: int = 10_000, seed: int = DEFAULT_SEED) -> list[VerificationRow]:
    return [verify_theory(p, n, seed, index=i) for i, p in enumerate(TABLE1_PARAMS)]


# ---------------------------------------------------------------- case study


@dataclass(frozen=True)
class CaseStudyConfig:
    primary_cue: str = "sonar"
    k: int = 3
    splits: tuple[float, float, float] = (0.8, 0.1, 0.1)
    runs: int = 100
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.primary_cue not in ("sonar", "barometer"):
            raise ValueError(f"primary_cue must be 'sonar' or 'barometer', got {self.primary_cue!r}")
        splits = tuple(float(s) for s in self.splits)
        object.__setattr__(self, "splits", splits)
        if len(splits) != 3 or any(s <= 0 for s in splits) or abs(sum(splits) - 1) > 1e-9:
            raise ValueError(f"splits must be three positive fractions summing to 1, got {splits}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class RunResult:
    run: int
    sigma_g2: float
    s_hat: float
    mae_primary: float
    mae_secondary: float
    mae_fused: float

    @property
    def success(self) -> bool:
        return self.mae_fused < self.mae_primary


@dataclass(frozen=True)
class RunReport:
    config: CaseStudyConfig
    runs: list[RunResult] = field(repr=False)
    mae_primary: float
    mae_secondary: float
    mae_fused: float
    success_rate: float

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "mae_primary": self.mae_primary,
            "mae_secondary": self.mae_secondary,
            "mae_fused": self.mae_fused,
            "success_rate": self.success_rate,
            "runs": [asdict(r) for r in self.runs],
        }


def split_indices(n: int, fractions, seed: int, run: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shuffle ``range(n)`` with the run's substream and cut it by ``fractions``."""
    perm = substream(seed, PURPOSE_SPLIT, run).permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def _cues(log: SensorLog, primary: str, train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Primary cue in metres and the raw secondary signal, for every record."""
    if primary == "sonar":
        return log.sonar_m, log.pressure_pa
    raw = pressure_to_height(log.pressure_pa)
    cal = calibrate(raw[train], log.truth_m[train])
    return cal.apply(raw), log.sonar_m


def case_study_run(log: SensorLog, config: CaseStudyConfig, run: int) -> RunResult:
    n = len(log)
    train, val, test = split_indices(n, config.splits, config.seed, run)
    smallest = min(len(train), len(val), len(test))
    if smallest < config.k + 2:
        raise est.InsufficientDataError(
            f"{n} records give a split of {smallest}; need at least k+2 = {config.k + 2} per split"
        )
    t = log.truth_m
    x_g, secondary = _cues(log, config.primary_cue, train)
    # known primary noise: ML variance about the ground truth
    sigma_g2 = max(float(np.mean((x_g[train] - t[train]) ** 2)), est.VAR_FLOOR)
    knn = est.fit_knn(secondary[train], x_g[train], config.k)
    s_hat = est.estimate_conditional_variance_moments(knn.predict(secondary[val]), x_g[val])
    model = est.FusionModel(sigma_g2, s_hat, knn)
    y_test = knn.predict(secondary[test])
    fused = est.fuse(model, y_test, x_g[test])
    return RunResult(
        run=run,
        sigma_g2=sigma_g2,
        s_hat=s_hat,
        mae_primary=est.errors(x_g[test], t[test]).mae,
        mae_secondary=est.errors(y_test, t[test]).mae,
        mae_fused=est.errors(fused, t[test]).mae,
    )


def run_case_study(log: SensorLog, config: CaseStudyConfig = CaseStudyConfig()) -> RunReport:
    results = [case_study_run(log, config, r) for r in range(config.runs)]
    return RunReport(
        config=config,
        runs=results,
        mae_primary=float(np.mean([r.mae_primary for r in results])),
        mae_secondary=float(np.mean([r.mae_secondary for r in results])),
        mae_fused=float(np.mean([r.mae_fused for r in results])),
        success_rate=sum(r.success for r in results) / len(results),
    )


# ---------------------------------------------------------------- distributions


@dataclass(frozen=True)
class DistStats:
    n: int
    mean: float
    std: float
    chi_square: float
    chi_square_bins: int
    p_value: float
    reps: int
    hist_edges: list[float]
    hist_counts: list[int]

    def to_dict(self) -> dict:
        return asdict(self)


def default_bins(n: int) -> int:
    return min(50, max(5, n // 50))


def _equiprobable_edges(bins: int) -> np.ndarray:
    """Interior standard-normal quantiles splitting the line into ``bins`` equal-mass cells."""
    return math.sqrt(2) * special.erfinv(2 * np.arange(1, bins) / bins - 1)


def _chi_square_rows(samples: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Chi-square of each row against the normal fitted to that row."""
    mu = samples.mean(axis=1, keepdims=True)
    sd = samples.std(axis=1, ddof=1, keepdims=True)
    z = (samples - mu) / sd
    rows, n = samples.shape
    bins = len(edges) + 1
    cell = np.searchsorted(edges, z) + bins * np.arange(rows)[:, None]
    counts = np.bincount(cell.ravel(), minlength=rows * bins).reshape(rows, bins)
    expected = n / bins
    return ((counts - expected) ** 2).sum(axis=1) / expected


@lru_cache(maxsize=16)
def _null_chi_square(n: int, bins: int, reps: int, seed: int) -> np.ndarray:
    edges = _equiprobable_edges(bins)
    batch = max(1, 2_000_000 // n)
    out = []
    for b, start in enumerate(range(0, reps, batch)):
        rows = min(batch, reps - start)
        sims = substream(seed, PURPOSE_NULL, n, bins, b).normal(rows * n).reshape(rows, n)
        out.append(_chi_square_rows(sims, edges))
    stats = np.concatenate(out)
    stats.setflags(write=False)
    return stats


def analyze_distribution(
    values,
    bins: int | None = None,
    *,
    reps: int = RANDOMIZATION_REPS,
    seed: int = DEFAULT_SEED,
) -> DistStats:
    """Compare ``values`` with the normal of matching mean and standard deviation.

    The chi-square statistic uses ``bins`` equal-probability cells of the
    fitted normal (default ``max(5, n // 50)``, at most 50). The p-value is a
    randomization test: the share of ``reps`` simulated normal samples of the
    same size, each binned against its own fitted normal, whose statistic is
    at least the observed one. The simulated statistics depend only on
    ``(n, bins, reps, seed)`` and are cached.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    n = x.size
    if n < 30:
        raise ValueError(f"need at least 30 values, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    bins = default_bins(n) if bins is None else int(bins)
    if bins < 3:
        raise ValueError(f"bins must be >= 3, got {bins}")
    sd = float(x.std(ddof=1))
    if not sd > 0:
        raise ValueError("values have zero spread; no matching normal exists")
    edges = _equiprobable_edges(bins)
    observed = float(_chi_square_rows(x[None, :], edges)[0])
    null = _null_chi_square(n, bins, reps, seed)
    p = float(np.count_nonzero(null >= observed) / reps)
    counts, hist_edges = np.histogram(x, bins=bins)
    return DistStats(
        n=n,
        mean=float(x.mean()),
        std=sd,
        chi_square=observed,
        chi_square_bins=bins,
        p_value=p,
        reps=reps,
        hist_edges=hist_edges.tolist(),
        hist_counts=counts.tolist(),
    )
