"""The minimal Gaussian self-supervised learning model.

A latent target ``t ~ N(0, sigma_t2)`` is observed through two conditionally
independent cues: the primary ``x_g ~ N(t, sigma_g2)`` and the secondary
``x_f ~ N(t, sigma_f2)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .rng import PURPOSE_DRAW, substream


class ParameterError(ValueError):
    """Invalid model parameters."""


@dataclass(frozen=True)
class ModelParams:
    sigma_t2: float
    sigma_g2: float
    sigma_f2: float

    def __post_init__(self) -> None:
        for name in ("sigma_t2", "sigma_g2", "sigma_f2"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite number, got {value!r}")
            if value <= 0:
                raise ParameterError(f"{name} must be strictly positive, got {value!r}")
            object.__setattr__(self, name, float(value))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sigma_t2, self.sigma_g2, self.sigma_f2)


@dataclass(frozen=True)
class Sample:
    t: float
    x_g: float
    x_f: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented draws from the model.

    ``samples`` gives the row view; numerical code should use the arrays.
    """

    t: np.ndarray
    x_g: np.ndarray
    x_f: np.ndarray
    seed: int
    params: ModelParams

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[Sample]:
        for t, g, f in zip(self.t, self.x_g, self.x_f):
            yield Sample(float(t), float(g), float(f))

    @property
    def samples(self) -> list[Sample]:
        return list(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.params == other.params
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.x_g, other.x_g)
            and np.array_equal(self.x_f, other.x_f)
        )

    def write_csv(self, path: str | Path) -> None:
        """Write ``t,x_g,x_f`` rows plus a ``<path>.json`` sidecar."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x_g", "x_f"])
            for row in zip(self.t.tolist(), self.x_g.tolist(), self.x_f.tolist()):
                writer.writerow([repr(v) for v in row])
        sidecar = {"params": asdict(self.params), "seed": self.seed, "n": len(self)}
        _sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    @classmethod
    def read_csv(cls, path: str | Path) -> "Dataset":
        path = Path(path)
        meta = json.loads(_sidecar_path(path).read_text())
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["t", "x_g", "x_f"]:
                raise ValueError(f"{path}: expected header t,x_g,x_f, got {header}")
            rows = [[float(v) for v in row] for row in reader if row]
        data = np.asarray(rows, dtype=np.float64).reshape(-1, 3)
        if len(data) != meta["n"]:
            raise ValueError(f"{path}: sidecar says n={meta['n']}, file has {len(data)} rows")
        return cls(
            t=data[:, 0].copy(),
            x_g=data[:, 1].copy(),
            x_f=data[:, 2].copy(),
            seed=int(meta["seed"]),
            params=ModelParams(**meta["params"]),
        )


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def draw(params: ModelParams, n: int, seed: int, *, index: int = 0) -> Dataset:
    """Draw ``n`` i.i.d. samples: ``t`` first, then both cues given ``t``.

    ``index`` selects an independent substream for repeated experiments that
    share one seed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not isinstance(params, ModelParams):
        raise ParameterError("params must be a ModelParams instance")
    stream = substream(seed, PURPOSE_DRAW, index)
    # interleaved (z_t, z_g, z_f) per sample so a prefix of a long draw
    # equals a short draw with the same seed
    z = stream.normal(3 * n).reshape(n, 3)
    t = math.sqrt(params.sigma_t2) * z[:, 0]
    x_g = t + math.sqrt(params.sigma_g2) * z[:, 1]
    x_f = t + math.sqrt(params.sigma_f2) * z[:, 2]
    return Dataset(t=t, x_g=x_g, x_f=x_f, seed=seed, params=params)
