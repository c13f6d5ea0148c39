from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def pmap(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Order-preserving map; ``workers > 1`` fans out to processes."""
    items = list(items)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def chunks(lo: int, hi: int, size: int) -> list[tuple[int, int]]:
    """Half-open [lo, hi) split into consecutive pieces of at most ``size``."""
    return [(s, min(s + size, hi)) for s in range(lo, hi, size)]
