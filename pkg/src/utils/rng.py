"""
Seeded random streams.

Every source of randomness (parameter init, scale draws, crops, pixel picks,
toy textures) gets its own Philox stream keyed by (seed, purpose). Philox is
a 64-bit counter-based generator, so a stream depends only on its key and
never on how much another stream has been consumed.
"""

import zlib

import numpy as np


def purpose_key(purpose: str) -> int:
    """Stable 32-bit key of a purpose label (CRC-32 of its UTF-8 bytes)."""
    return zlib.crc32(purpose.encode("utf-8"))


def derive_stream(seed: int, purpose: str) -> np.random.Generator:
    """Independent generator for one purpose, e.g. derive_stream(7, "init/encoder")."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(purpose_key(purpose),))
    return np.random.Generator(np.random.Philox(sequence))
