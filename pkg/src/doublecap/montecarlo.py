"""Chunked, seed-stable Monte Carlo counting.

Trials are split into fixed-size chunks; chunk ``i`` always draws from
``RandomStream(seed, i)``. Chunk results are integer counts summed in chunk
order, so the total is identical for any worker count.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .hilbert import RandomStream

CHUNK = 1 << 16


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit seed for a sub-task identified by ``keys``."""
    # Leading tag keeps derived seeds apart from chunk stream keys.
    ss = np.random.SeedSequence(seed, spawn_key=(0xD5EED, *keys))
    return int(ss.generate_state(1, np.uint64)[0])


def chunk_sizes(trials: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def count_hits(
    sampler: Callable[[int, RandomStream], int],
    trials: int,
    seed: int,
    threads: int = 1,
    chunk: int = CHUNK,
) -> int:
    """Sum ``sampler(size, stream)`` over all chunks of ``trials``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    sizes = chunk_sizes(trials, chunk)
    jobs = [(size, RandomStream(seed, i)) for i, size in enumerate(sizes)]
    if threads <= 1 or len(jobs) == 1:
        return sum(sampler(size, rng) for size, rng in jobs)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(lambda job: sampler(*job), jobs))
