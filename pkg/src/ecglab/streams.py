"""Derived RNG streams and ordered parallel maps.

Every random quantity is drawn from a stream keyed by (master seed, tag,
index), so results never depend on the worker count or on scheduling.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

DEFAULT_SEED = 20240611
BATCH = 256

T = TypeVar("T")


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    key = zlib.crc32(tag.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key, int(index)]))


def batches(total: int, size: int = BATCH) -> list[tuple[int, int]]:
    """(start, stop) pairs covering range(total) in fixed-size chunks."""
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def ordered_map(fn: Callable[[int], T], items: Iterable[int], threads: int = 1) -> list[T]:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
