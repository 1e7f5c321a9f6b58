"""Seeded random streams.

Every Monte Carlo routine takes either an integer seed or a
``numpy.random.Generator``.  Per-trial streams are derived from a master
seed and an index path through :class:`numpy.random.SeedSequence`, feeding
the counter-based Philox bit generator, so trial ``(i, j)`` always sees the
same numbers no matter how many workers run or in which order.
"""
import numpy as np

__all__ = ["substream", "as_generator"]


def substream(seed, *path):
    """Return the generator for the stream at ``path`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng):
    """Coerce an int seed (or ``None``) to a Generator; pass Generators through."""
    if isinstance(rng, np.random.Generator):
        return rng
    return substream(0 if rng is None else rng)
