"""Sonar/barometer data path: barometric height, calibration, logs.

The flight logs used for the case study are not public, so
:func:`synthesize_log` generates a stand-in: a smooth indoor flight profile
observed by a Gaussian sonar and a noisy barometer. Its default pressure noise
is tuned so that the pressure cue learned against sonar ends up with roughly
0.25 m error spread, about what the real platform produced; it is an
approximation, not a measured sensor spec.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .rng import PURPOSE_SYNTH, substream

LOG_COLUMNS = ("time_s", "truth_m", "sonar_m", "pressure_pa")


class LogFormatError(ValueError):
    """A sensor log failed to parse or validate."""


@dataclass(frozen=True)
class BarometricConstants:
    R: float = 8.31446
    T_s: float = 288.15
    M: float = 0.0289644
    g: float = 9.80665
    P_s: float = 101325.0

    @property
    def scale_height(self) -> float:
        """R T_s / (M g), in metres."""
        return self.R * self.T_s / (self.M * self.g)


STANDARD_ATMOSPHERE = BarometricConstants()


def pressure_to_height(pressure, consts: BarometricConstants = STANDARD_ATMOSPHERE):
    """Isothermal barometric height, ``(R T_s / (M g)) ln(P_s / P)``."""
    p = np.asarray(pressure, dtype=np.float64)
    if np.any(~(p > 0)):
        raise ValueError("pressure must be strictly positive")
    # P_s - P is exact near P_s, so log1p keeps low heights accurate
    h = consts.scale_height * np.log1p((consts.P_s - p) / p)
    return float(h) if h.ndim == 0 else h


def height_to_pressure(height, consts: BarometricConstants = STANDARD_ATMOSPHERE):
    h = np.asarray(height, dtype=np.float64)
    p = consts.P_s * np.exp(-h / consts.scale_height)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class Calibration:
    scale: float
    offset: float

    def apply(self, raw):
        return self.scale * np.asarray(raw, dtype=np.float64) + self.offset


def calibrate(raw_heights, reference_heights) -> Calibration:
    """Ordinary least-squares affine map from ``raw_heights`` to ``reference_heights``."""
    x = np.asarray(raw_heights, dtype=np.float64)
    y = np.asarray(reference_heights, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("raw and reference heights differ in length")
    if x.size < 2:
        raise ValueError(f"need at least 2 points, got {x.size}")
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0:
        raise ValueError("raw heights are all equal")
    scale = float(np.dot(xc, y - y.mean()) / sxx)
    if not math.isfinite(scale) or scale == 0:
        raise ValueError(f"degenerate calibration scale {scale}")
    return Calibration(scale=scale, offset=float(y.mean() - scale * x.mean()))


@dataclass(frozen=True, eq=False)
class SensorLog:
    time_s: np.ndarray
    truth_m: np.ndarray
    sonar_m: np.ndarray
    pressure_pa: np.ndarray

    def __post_init__(self) -> None:
        cols = [np.asarray(getattr(self, c), dtype=np.float64) for c in LOG_COLUMNS]
        if len({len(c) for c in cols}) != 1:
            raise LogFormatError("columns differ in length")
        for name, col in zip(LOG_COLUMNS, cols):
            object.__setattr__(self, name, col)
            if not np.all(np.isfinite(col)):
                raise LogFormatError(f"{name} has non-finite values")
        if np.any(np.diff(self.time_s) <= 0):
            raise LogFormatError("timestamps are not strictly increasing")
        if np.any(self.pressure_pa <= 0):
            raise LogFormatError("pressure must be positive")

    def __len__(self) -> int:
        return len(self.time_s)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SensorLog):
            return NotImplemented
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in LOG_COLUMNS)

    @property
    def records(self) -> list[dict]:
        return [
            dict(zip(LOG_COLUMNS, row))
            for row in zip(*(getattr(self, c).tolist() for c in LOG_COLUMNS))
        ]

    def write_csv(self, dest) -> None:
        """Write to a path or an open text file; floats keep full precision."""
        if hasattr(dest, "write"):
            self._write(dest)
            return
        with Path(dest).open("w", newline="") as fh:
            self._write(fh)

    def _write(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for row in zip(*(getattr(self, c).tolist() for c in LOG_COLUMNS)):
            writer.writerow([repr(v) for v in row])


def load_log(path: str | Path, columns: dict[str, str] | None = None) -> SensorLog:
    """Read and validate a sensor log CSV.

    ``columns`` maps the canonical names in :data:`LOG_COLUMNS` to the header
    names used in the file, for logs written by other tools. Every offending
    row is reported, with its 1-based line number, in one :class:`LogFormatError`.
    """
    path = Path(path)
    names = {c: c for c in LOG_COLUMNS}
    if columns:
        unknown = set(columns) - set(LOG_COLUMNS)
        if unknown:
            raise LogFormatError(f"unknown column keys {sorted(unknown)}")
        names.update(columns)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise LogFormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [names[c] for c in LOG_COLUMNS if names[c] not in header]
        if missing:
            raise LogFormatError(f"{path}:1: missing columns {missing}")
        pick = [header.index(names[c]) for c in LOG_COLUMNS]
        rows: list[list[float]] = []
        problems: list[str] = []
        last_time = -math.inf
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(row[i]) for i in pick]
            except (ValueError, IndexError):
                problems.append(f"{path}:{lineno}: cannot parse {row!r}")
                continue
            if not all(math.isfinite(v) for v in values):
                problems.append(f"{path}:{lineno}: non-finite value")
                continue
            if values[0] <= last_time:
                problems.append(f"{path}:{lineno}: timestamp {values[0]} not after {last_time}")
                continue
            if values[3] <= 0:
                problems.append(f"{path}:{lineno}: non-positive pressure {values[3]}")
                continue
            last_time = values[0]
            rows.append(values)
    if problems:
        shown = "\n".join(problems[:20])
        more = f"\n... and {len(problems) - 20} more" if len(problems) > 20 else ""
        raise LogFormatError(f"{len(problems)} invalid rows:\n{shown}{more}")
    if not rows:
        raise LogFormatError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return SensorLog(*(data[:, i].copy() for i in range(4)))


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic flight: hover-interrupted sum of slow sinusoids, two noisy sensors."""

    duration_s: float = 600.0
    sample_rate_hz: float = 20.0
    base_height_m: float = 1.5
    amplitudes_m: tuple[float, ...] = (0.65, 0.45, 0.3)
    periods_s: tuple[float, ...] = (47.0, 19.0, 7.3)
    hover_every_s: float = 40.0
    hover_duration_s: float = 8.0
    site_altitude_m: float = 50.0
    sonar_sigma_m: float = 0.29
    pressure_sigma_pa: float = 2.0
    seed: int = 7

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitudes_m", tuple(float(a) for a in self.amplitudes_m))
        object.__setattr__(self, "periods_s", tuple(float(p) for p in self.periods_s))
        if not (self.duration_s > 0 and self.sample_rate_hz > 0):
            raise ValueError("duration and sample rate must be positive")
        if self.sonar_sigma_m < 0 or self.pressure_sigma_pa < 0:
            raise ValueError("noise levels must be non-negative")
        if len(self.amplitudes_m) != len(self.periods_s):
            raise ValueError("amplitudes_m and periods_s differ in length")
        if any(p <= 0 for p in self.periods_s):
            raise ValueError("periods must be positive")
        if self.hover_every_s <= 0 or not 0 <= self.hover_duration_s < self.hover_every_s:
            raise ValueError("need 0 <= hover_duration_s < hover_every_s")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["amplitudes_m"] = list(self.amplitudes_m)
        d["periods_s"] = list(self.periods_s)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synth config keys {sorted(unknown)}")
        return cls(**d)


def synthesize_log(config: SynthConfig = SynthConfig()) -> SensorLog:
    n = int(round(config.duration_s * config.sample_rate_hz))
    if n < 2:
        raise ValueError("config yields fewer than 2 samples")
    stream = substream(config.seed, PURPOSE_SYNTH)
    time_s = np.arange(n) / config.sample_rate_hz
    phases = 2 * np.pi * stream.uniform(len(config.periods_s))
    # motion clock stops during hovers, freezing the height
    flying = (time_s % config.hover_every_s) >= config.hover_duration_s
    tau = np.concatenate([[0.0], np.cumsum(flying[1:] / config.sample_rate_hz)])
    truth = np.full(n, config.base_height_m)
    for amp, period, phase in zip(config.amplitudes_m, config.periods_s, phases):
        truth += amp * np.sin(2 * np.pi * tau / period + phase)
    truth = np.maximum(truth, 0.0)
    sonar = truth + stream.normal(n, scale=config.sonar_sigma_m)
    pressure = height_to_pressure(truth + config.site_altitude_m)
    pressure = pressure + stream.normal(n, scale=config.pressure_sigma_pa)
    return SensorLog(time_s, truth, sonar, pressure)


def load_synth_config(path: str | Path) -> SynthConfig:
    return SynthConfig.from_dict(json.loads(Path(path).read_text()))
