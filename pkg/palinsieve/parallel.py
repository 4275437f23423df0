"""Order-preserving process pool used by the sweeps."""

import multiprocessing
from collections.abc import Callable, Iterable
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """``[fn(item) for item in items]``, optionally across worker processes.

    Results come back in input order whatever the worker count, so callers
    that merge them in that order produce identical output for any
    ``workers``. ``fn`` must be a module-level function.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with multiprocessing.Pool(processes=min(workers, len(items))) as pool:
        return pool.map(fn, items, chunksize=1)
