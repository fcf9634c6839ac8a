"""Seeded random streams.

Every random draw in the package comes from ``substream(seed, replication,
block)``. The triple is mapped to an independent PCG64 stream through
``SeedSequence(seed, spawn_key=(block, replication))``, so a given triple
always reproduces the same numbers, independently of how replications are
distributed across workers.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, replication: int = 0, block: int = 0) -> np.random.Generator:
    if seed < 0 or replication < 0 or block < 0:
        raise ValueError("seed, replication and block must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block), int(replication)))
    return np.random.Generator(np.random.PCG64(ss))
