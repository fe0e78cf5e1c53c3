"""Counter-based random streams.

Every Monte Carlo sample owns the substream ``stream(seed, index)``: a Philox
generator keyed by the seed whose counter starts at block ``index << 64``.
Output therefore depends only on (seed, sample index), never on how samples
are batched or spread across workers.
"""

from __future__ import annotations

import numpy as np

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` under ``seed``."""
    if index < 0 or index > SEED_MAX:
        raise ValueError(f"sample index {index} out of range")
    bitgen = np.random.Philox(key=check_seed(seed), counter=[0, int(index), 0, 0])
    return np.random.Generator(bitgen)


def uniforms(seed: int, index: int, size: int) -> np.ndarray:
    """The first ``size`` uniforms in [0, 1) of a sample's substream."""
    return stream(seed, index).random(size)


def uniform_block(seed: int, start: int, stop: int, size: int) -> np.ndarray:
    """Stack ``uniforms(seed, j, size)`` for j in [start, stop)."""
    out = np.empty((stop - start, size))
    for row, j in enumerate(range(start, stop)):
        out[row] = stream(seed, j).random(size)
    return out


def index_from_uniform(u, n: int):
    """Map u in [0, 1) to {0, ..., n-1}; works on scalars and arrays."""
    j = np.floor(np.asarray(u) * n).astype(np.int64)
    j = np.minimum(j, n - 1)
    return int(j) if j.ndim == 0 else j


def categorical(u: float, cdf: np.ndarray) -> int:
    """Inverse-CDF draw: smallest index with cdf[idx] > u."""
    idx = int(np.searchsorted(cdf, u, side="right"))
    return min(idx, len(cdf) - 1)
