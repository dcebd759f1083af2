"""Ordered process-pool map used by the estimators and experiment runners."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["ordered_map"]


def _apply_chunk(args):
    fn, items = args
    return [fn(x) for x in items]


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1, chunk: int = 8) -> list[R]:
    """``[fn(x) for x in items]`` spread over ``workers`` processes.

    Chunks are fixed by ``chunk`` alone and results come back in input
    order, so the output is independent of the worker count.  ``fn`` must
    be picklable (a module-level function or a ``functools.partial`` of one).
    """
    items = list(items)
    chunks = [(fn, items[i:i + chunk]) for i in range(0, len(items), chunk)]
    if workers <= 1 or len(chunks) <= 1:
        parts = [_apply_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(_apply_chunk, chunks))
    return [r for part in parts for r in part]
