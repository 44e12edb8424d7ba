"""Order-preserving worker pool for the pure per-page stages."""

from __future__ import annotations

import itertools
import multiprocessing as mp
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")

BATCH = 512


def ordered_map(fn: Callable, items: Iterable[T], workers: int = 1,
                arg: Callable[[T], object] | None = None, chunksize: int = 16) -> Iterator[tuple[T, R]]:
    """Yield ``(item, fn(arg(item)))`` in input order.

    ``fn`` must be a picklable top-level function when ``workers > 1``. Items
    are fed in bounded batches so memory stays flat on long streams.
    """
    arg = arg or (lambda x: x)
    if workers <= 1:
        for item in items:
            yield item, fn(arg(item))
        return
    it = iter(items)
    with mp.get_context("spawn").Pool(workers) as pool:
        while True:
            batch = list(itertools.islice(it, BATCH))
            if not batch:
                break
            results = pool.map(fn, [arg(x) for x in batch], chunksize=chunksize)
            yield from zip(batch, results)
