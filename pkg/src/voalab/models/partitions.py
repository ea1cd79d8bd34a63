"""Integer partitions as descending tuples."""

from functools import lru_cache
from typing import Tuple


@lru_cache(maxsize=None)
def partitions(n: int, min_part: int = 1, max_part: int = None) -> Tuple[Tuple[int, ...], ...]:
    """Partitions of n into parts in [min_part, max_part], largest parts first."""
    if max_part is None:
        max_part = n
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), min_part - 1, -1):
        for rest in partitions(n - first, min_part, first):
            out.append((first,) + rest)
    return tuple(out)


def insert_part(part: Tuple[int, ...], k: int) -> Tuple[int, ...]:
    return tuple(sorted(part + (k,), reverse=True))


def remove_part(part: Tuple[int, ...], k: int) -> Tuple[int, ...]:
    lst = list(part)
    lst.remove(k)
    return tuple(lst)
