"""Counter-based random stream derivation.

Every stochastic routine in the package draws from a generator derived from a
``(master_seed, stream_index)`` pair, so that estimates are pure functions of
their seed arguments and independent streams can be consumed in any order
(realization ``r`` of a Monte Carlo loop always uses stream ``r``).
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream_rng"]


def stream_rng(master_seed: int, stream_index: int, attempt: int = 0) -> np.random.Generator:
    """Return the generator for one stream of a master seed.

    Parameters
    ----------
    master_seed : int
        Seed of the whole experiment.
    stream_index : int
        Index of the independent substream (realization counter).
    attempt : int, optional
        Retry counter; redraws after a rejected realization use the same
        stream index with an incremented attempt so results stay reproducible
        regardless of which realizations needed retries.
    """
    if master_seed < 0 or stream_index < 0 or attempt < 0:
        raise ValueError("seed, stream and attempt must be non-negative")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(stream_index, attempt))
    return np.random.default_rng(seq)
