"""Seeded random streams.

Every stage draws from its own PCG64 stream whose seed is derived from the
run seed and the stage name, so adding or reordering stages never shifts
another stage's random numbers.
"""

import hashlib

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{int(seed)}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
