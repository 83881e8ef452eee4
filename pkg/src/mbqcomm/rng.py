"""Reproducible, splittable random streams on the Philox counter-based
bit generator.

Stream derivation (stable across versions): the Philox key is the pair
(master_seed, shard_id * 2^32 + trajectory_id), both reduced modulo
2^64. Distinct (shard, trajectory) pairs give independent streams; a
single-shard run is bitwise reproducible from (seed, config, version).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def seed_derive(master_seed: int, shard_id: int = 0, trajectory_id: int = 0) -> tuple[int, int]:
    """Derive the 2x64-bit Philox key for one logical stream."""
    if shard_id < 0 or trajectory_id < 0:
        raise ValueError("stream ids must be nonnegative")
    return (
        master_seed & _MASK64,
        ((shard_id << 32) ^ trajectory_id) & _MASK64,
    )


def make_rng(master_seed: int, shard_id: int = 0, trajectory_id: int = 0) -> np.random.Generator:
    """Generator for one stream; same inputs always give the same stream."""
    key = seed_derive(master_seed, shard_id, trajectory_id)
    return np.random.Generator(np.random.Philox(key=key))


def default_shards() -> int:
    import os

    value = os.environ.get("MBQCOMM_SHARDS", "1")
    try:
        shards = int(value)
    except ValueError as exc:
        raise ValueError("MBQCOMM_SHARDS must be an integer") from exc
    return max(1, shards)
