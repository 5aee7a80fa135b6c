"""Counter-based random streams.

Every stream is a Philox generator keyed by (seed, *keys). A Monte-Carlo
block with key (k,) therefore produces the same draws no matter which
worker runs it or in which order blocks are processed.
"""

import numpy as np


def stream(seed, *keys):
    """Independent generator for the stream addressed by ``keys``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng):
    """Accept a Generator, an int seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else rng)
