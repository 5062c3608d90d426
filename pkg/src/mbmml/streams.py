"""Deterministic random streams.

Every generator is a PCG64 bit generator seeded from
``SeedSequence(entropy=seed, spawn_key=keys)``. Keys name the sub-task
(string tags are hashed to 32-bit integers), so a stream depends only on the
root seed and its key path, never on execution order.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    k = int(k)
    if k < 0:
        raise ValueError("stream keys must be non-negative")
    return k


def derive_rng(seed: int, *keys) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))
