"""Deterministic seed derivation.

All derived seeds come from ``numpy.random.SeedSequence`` over an integer key
path, e.g. ``(outer_seed, generation, algo_id, run)``. SeedSequence hashes its
entropy words, so sibling keys yield statistically independent streams.
"""

import zlib

import numpy as np


def tag_id(tag: str) -> int:
    """Stable 32-bit id for a string tag (CRC32 of its lowercase UTF-8)."""
    return zlib.crc32(tag.lower().encode("utf-8"))


def mix(*keys) -> int:
    """Map a path of integers/strings to a 63-bit seed."""
    words = []
    for k in keys:
        if isinstance(k, str):
            k = tag_id(k)
        k = int(k)
        if k < 0:
            raise ValueError(f"seed keys must be non-negative, got {k}")
        words.append(k)
    state = np.random.SeedSequence(words).generate_state(2, np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1
