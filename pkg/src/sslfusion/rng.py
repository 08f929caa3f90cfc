"""Seeded random streams.

All randomness in the package flows through :class:`Stream`, which wraps the
PCG64 bit generator (PCG-XSL-RR 128/64). Raw 64-bit outputs of PCG64 are fixed
by its published algorithm, so they do not drift between NumPy releases the way
``Generator.normal`` / ``Generator.permutation`` may. Uniform and normal
variates are derived from the raw words here:

* uniform: top 53 bits of each word, scaled to [0, 1)
* normal: Box-Muller on consecutive uniform pairs, cosine branch first

Substreams are addressed by a counter key. ``substream(seed, *key)`` builds a
``SeedSequence(seed, spawn_key=key)``; by convention ``key[0]`` is a purpose tag
(see the ``PURPOSE_*`` constants) and the remaining entries are run/batch
indices. Two different keys give statistically independent streams, and a
given ``(seed, key)`` always gives the same stream regardless of what else was
drawn, which keeps parallel or reordered runs reproducible.
"""

from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20170901

PURPOSE_DRAW = 0
PURPOSE_SPLIT = 1
PURPOSE_SYNTH = 2
PURPOSE_NULL = 3
PURPOSE_TEST = 99

_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0


class Stream:
    """A deterministic source of uniform and standard-normal doubles."""

    algorithm = "pcg64/box-muller/v1"

    def __init__(self, seed: int, key: tuple[int, ...] = ()) -> None:
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._bits = np.random.PCG64(seq)

    def raw(self, n: int) -> np.ndarray:
        return self._bits.random_raw(n)

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1)."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normal(self, n: int, loc: float = 0.0, scale: float = 1.0) -> np.ndarray:
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        # 1 - u lies in (0, 1], so the log is finite
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        theta = _TWO_PI * u[1::2]
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return loc + scale * z[:n]

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of ``range(n)`` (argsort of random keys)."""
        return np.argsort(self.raw(n), kind="stable")


def substream(seed: int, *key: int) -> Stream:
    return Stream(seed, key)
