"""Seeded random streams.

Every random draw in the package comes from a PCG64 generator whose
SeedSequence entropy is ``(seed, *keys)``.  The keys name the stream
(initialization, shuffling, dropout, ...) and mix in loop indices such as
the epoch, so that streams are independent yet fully reproducible.
PCG64 output is specified bit-for-bit, so results are platform independent.
"""

import numpy as np

MASK64 = (1 << 64) - 1

# stream identifiers
INIT = 1
SPLIT = 2
SHUFFLE = 3
DROPOUT = 4
NOISE = 5


def make_rng(seed, *keys):
    """Return a Generator for the stream ``keys`` under the 64-bit ``seed``."""
    entropy = [int(seed) & MASK64] + [int(k) & MASK64 for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
