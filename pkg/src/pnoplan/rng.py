"""Seeded random-stream derivation.

All randomness in the package flows from one 64-bit seed per run.  Independent
substreams are derived deterministically from (seed, *path) so that chunked or
per-trial work can be reordered or parallelised without changing results.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return a generator derived from ``seed`` and an integer branch path.

    The same (seed, path) always yields the same stream, and distinct paths
    yield statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))
