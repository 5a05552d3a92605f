"""Counter-based random substreams.

Every random draw in the package comes from ``substream(seed, index)``: a
Philox generator keyed by the pair, so a trial (or a chunk of trials) sees
the same numbers whatever order or thread it runs in.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_CHUNK = 1 << 14


def substream(seed: int, index: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq))


def chunk_sizes(trials: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(
    fn: Callable[[np.random.Generator, int], T],
    seed: int,
    trials: int,
    *,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
    stream_offset: int = 0,
) -> list[T]:
    """Run ``fn(rng, size)`` over fixed-size chunks, results in chunk order.

    Chunk ``i`` always draws from ``substream(seed, stream_offset + i)`` so
    the concatenated output does not depend on ``workers``.
    """
    sizes = chunk_sizes(trials, chunk)
    jobs = [(substream(seed, stream_offset + i), size) for i, size in enumerate(sizes)]
    if workers <= 1 or len(jobs) == 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
