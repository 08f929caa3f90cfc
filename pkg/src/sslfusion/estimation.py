"""Robot-side learning and fusion.

The robot sees only ``(x_f, x_g)`` pairs. It learns ``y_f = f(x_f)`` with
``x_g`` as the target, estimates var(y_f | x_g) from observed variables, and
combines ``y_f`` and ``x_g`` by precision weighting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

VAR_FLOOR = 1e-9
DEFAULT_WINDOW = (-0.05, 0.05)


class FitError(ValueError):
    """The data cannot determine the requested model."""


class InsufficientDataError(ValueError):
    """Too few observations for the requested estimate."""


@dataclass(frozen=True)
class LinearMap:
    a: float
    b: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise FitError(f"non-finite coefficients a={self.a}, b={self.b}")

    def predict(self, x):
        return self.a * np.asarray(x, dtype=np.float64) + self.b

    def to_dict(self) -> dict:
        return {"kind": "linear", "a": self.a, "b": self.b}


class KnnRegressor:
    """Unweighted k-nearest-neighbour regression on a scalar input.

    Neighbours are ranked by ``|input - x|``; equal distances go to the smaller
    input, then to the earlier training pair. Internally the pairs are kept
    sorted by ``(input, training index)`` so a query only inspects the ``k``
    sorted neighbours on each side of its insertion point.
    """

    def __init__(self, inputs, targets, k: int) -> None:
        inputs = np.asarray(inputs, dtype=np.float64).ravel()
        targets = np.asarray(targets, dtype=np.float64).ravel()
        if len(inputs) != len(targets):
            raise FitError("inputs and targets differ in length")
        if k < 1:
            raise FitError(f"k must be >= 1, got {k}")
        if k > len(inputs):
            raise FitError(f"k={k} exceeds the {len(inputs)} training pairs")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise FitError("training pairs must be finite")
        self.k = int(k)
        self.inputs = inputs
        self.targets = targets
        self._order = np.argsort(inputs, kind="stable")
        self._xs = inputs[self._order]
        # start of each run of equal inputs, in sorted coordinates
        new_run = np.empty(len(self._xs), dtype=bool)
        new_run[0] = True
        new_run[1:] = self._xs[1:] != self._xs[:-1]
        self._run_start = np.maximum.accumulate(np.where(new_run, np.arange(len(self._xs)), 0))

    def __len__(self) -> int:
        return len(self.inputs)

    def neighbors(self, x) -> np.ndarray:
        """Training indices of the ``k`` neighbours, one row per query, ascending."""
        q = np.atleast_1d(np.asarray(x, dtype=np.float64))
        n, k = len(self._xs), self.k
        pos = np.searchsorted(self._xs, q, side="left")
        # the k nearest always sit within k sorted slots of the insertion point
        offsets = np.arange(-k, k)
        cand = pos[:, None] + offsets[None, :]
        valid = (cand >= 0) & (cand < n)
        cand_c = np.clip(cand, 0, n - 1)
        dist = np.where(valid, np.abs(self._xs[cand_c] - q[:, None]), np.inf)
        # (distance, sorted slot) is the full tie-break order
        rank = np.lexsort((cand_c, dist), axis=-1)[:, :k]
        chosen = np.take_along_axis(cand_c, rank, axis=1)
        chosen.sort(axis=1)
        # within a run of equal inputs the window may hold the tail of the run
        # while the tie-break wants its head: shift to run_start + ordinal
        run = self._run_start[chosen]
        ordinal = np.zeros_like(chosen)
        for j in range(1, k):
            same = run[:, j] == run[:, j - 1]
            ordinal[:, j] = np.where(same, ordinal[:, j - 1] + 1, 0)
        fixed = run + ordinal
        idx = self._order[fixed]
        idx.sort(axis=1)
        return idx

    def predict(self, x):
        idx = self.neighbors(x)
        out = self.targets[idx].mean(axis=1)
        return out if np.ndim(x) else float(out[0])

    def to_dict(self) -> dict:
        return {
            "kind": "knn",
            "k": self.k,
            "inputs": self.inputs.tolist(),
            "targets": self.targets.tolist(),
        }


Regressor = Union[LinearMap, KnnRegressor]


def fit_linear(x_f, x_g) -> LinearMap:
    """Zero-intercept least squares of ``x_g`` on ``x_f``."""
    x_f = np.asarray(x_f, dtype=np.float64)
    x_g = np.asarray(x_g, dtype=np.float64)
    if x_f.shape != x_g.shape:
        raise FitError("x_f and x_g differ in shape")
    if x_f.size < 2:
        raise FitError(f"need at least 2 pairs, got {x_f.size}")
    if np.all(x_f == x_f.flat[0]):
        raise FitError("all inputs identical")
    return LinearMap(a=float(np.dot(x_f, x_g) / np.dot(x_f, x_f)))


def fit_knn(inputs, targets, k: int = 3) -> KnnRegressor:
    return KnnRegressor(inputs, targets, k)


def predict(regressor: Regressor, x):
    return regressor.predict(x)


def quantile_window(x_g, p: float = 5.0) -> tuple[float, float]:
    """Interval holding the central ``p`` percent of ``x_g``."""
    if not 0 < p <= 100:
        raise ValueError(f"p must be in (0, 100], got {p}")
    lo, hi = np.percentile(np.asarray(x_g, dtype=np.float64), [50 - p / 2, 50 + p / 2])
    return float(lo), float(hi)


def estimate_conditional_variance_windowed(y_f, x_g, window=DEFAULT_WINDOW) -> float:
    """Unbiased variance of ``y_f`` over the pairs whose ``x_g`` falls in ``window``."""
    y_f = np.asarray(y_f, dtype=np.float64)
    x_g = np.asarray(x_g, dtype=np.float64)
    lo, hi = window
    inside = (x_g >= lo) & (x_g <= hi)
    m = int(inside.sum())
    if m < 2:
        raise InsufficientDataError(f"{m} pairs with x_g in [{lo}, {hi}]; need at least 2")
    return float(np.var(y_f[inside], ddof=1))


def estimate_conditional_variance_moments(y_f, x_g, floor: float = VAR_FLOOR) -> float:
    """Gaussian plug-in var(y_f) - cov(y_f, x_g)^2 / var(x_g), floored at ``floor``."""
    y_f = np.asarray(y_f, dtype=np.float64)
    x_g = np.asarray(x_g, dtype=np.float64)
    if y_f.shape != x_g.shape:
        raise FitError("y_f and x_g differ in shape")
    if y_f.size < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {y_f.size}")
    var_x = np.var(x_g, ddof=1)
    if var_x <= 0:
        raise FitError("x_g has zero variance")
    var_y = np.var(y_f, ddof=1)
    cov = np.sum((y_f - y_f.mean()) * (x_g - x_g.mean())) / (y_f.size - 1)
    return float(max(var_y - cov * cov / var_x, floor))


@dataclass(frozen=True)
class FusionModel:
    sigma_g2_known: float
    s_hat: float
    regressor: Regressor | None = None

    def __post_init__(self) -> None:
        if not self.sigma_g2_known > 0:
            raise ValueError(f"sigma_g2_known must be positive, got {self.sigma_g2_known}")
        if not self.s_hat > 0:
            raise ValueError(f"s_hat must be positive, got {self.s_hat}")

    @property
    def weights(self) -> tuple[float, float]:
        total = self.sigma_g2_known + self.s_hat
        return self.sigma_g2_known / total, self.s_hat / total

    def to_dict(self) -> dict:
        return {
            "sigma_g2_known": self.sigma_g2_known,
            "s_hat": self.s_hat,
            "regressor": None if self.regressor is None else self.regressor.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FusionModel":
        reg = d.get("regressor")
        regressor: Regressor | None
        if reg is None:
            regressor = None
        elif reg["kind"] == "linear":
            regressor = LinearMap(a=float(reg["a"]), b=float(reg["b"]))
        elif reg["kind"] == "knn":
            regressor = KnnRegressor(reg["inputs"], reg["targets"], int(reg["k"]))
        else:
            raise ValueError(f"unknown regressor kind {reg['kind']!r}")
        return cls(float(d["sigma_g2_known"]), float(d["s_hat"]), regressor)


def fuse(model: FusionModel, y_f, x_g):
    """Maximum-likelihood combination of ``y_f`` and ``x_g``."""
    sg, s = model.sigma_g2_known, model.s_hat
    return (sg * np.asarray(y_f, dtype=np.float64) + s * np.asarray(x_g, dtype=np.float64)) / (sg + s)


@dataclass(frozen=True)
class ErrorSummary:
    mse: float
    mae: float


def errors(estimates, truths) -> ErrorSummary:
    estimates = np.asarray(estimates, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if estimates.shape != truths.shape:
        raise ValueError(f"length mismatch: {estimates.shape} vs {truths.shape}")
    if estimates.size < 1:
        raise ValueError("need at least one estimate")
    d = estimates - truths
    return ErrorSummary(mse=float(np.mean(d * d)), mae=float(np.mean(np.abs(d))))
