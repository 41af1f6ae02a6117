"""Seed plumbing.

Every randomized operation takes a root seed plus a label path and draws from
a Philox stream keyed on both, so module-level streams are derived from one
64-bit seed instead of sharing state.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(label: int | str) -> int:
    if isinstance(label, int):
        return label & 0xFFFFFFFF
    return zlib.crc32(label.encode("utf-8"))


def generator(seed: int, *labels: int | str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed & (2**64 - 1), spawn_key=tuple(_key(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *labels: int | str) -> int:
    """A child 64-bit seed for handing to another operation."""
    ss = np.random.SeedSequence(entropy=seed & (2**64 - 1), spawn_key=tuple(_key(x) for x in labels))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
