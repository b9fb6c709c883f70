"""Labelled random streams derived from one integer seed.

``stream(seed, "train", "mlp")`` always yields the same generator, and the
stream for one label is unaffected by which other labels are requested.
"""

import zlib

import numpy as np


def _key(label) -> int:
    return zlib.crc32(str(label).encode("utf-8"))


def stream(seed: int, *labels) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(_key(l) for l in labels))
    return np.random.default_rng(ss)


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed))
