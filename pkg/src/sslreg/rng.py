"""Seeded random streams for reproducible replication experiments.

All randomness in this package flows through `substream`. A substream is
identified by a base seed plus a tuple of non-negative integers (replicate
index, cell index, and so on). Philox is counter based, so substream k is
the same bit stream whether replicates run serially, in any order, or on
any number of threads. That is what makes bootstrap matrices and sweep
tables reproducible from (data, seed) alone.
"""

import numpy as np

__all__ = ["substream"]


def substream(seed, *key):
    """Return a `numpy.random.Generator` for the given seed and stream key.

    Parameters
    ----------
    seed : int
        Base seed, any non-negative integer (64-bit range is fine).
    *key : int
        Zero or more non-negative integers identifying the substream.
        Different keys give statistically independent streams; the same
        (seed, key) always gives the same stream.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    for k in key:
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("substream key parts must be non-negative integers")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
