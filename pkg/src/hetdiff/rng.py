"""Per-path random substreams.

Every path owns independent counter-based (Philox) generators keyed by
``(master_seed, path_index, stream)``, so a path's draws do not depend on how
paths are grouped into blocks or spread across threads.
"""

import secrets

import numpy as np

INCREMENTS = 0
SIGNS = 1

__all__ = ["INCREMENTS", "SIGNS", "path_rng", "fresh_seed"]


def path_rng(master_seed, path_index, stream=INCREMENTS):
    """Generator for one (path, stream) pair."""
    ss = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1),
                                spawn_key=(int(path_index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def fresh_seed():
    """A 63-bit seed drawn from OS entropy (for runs without an explicit seed)."""
    return secrets.randbits(63)
