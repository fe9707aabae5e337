"""Process-pool helper that keeps results in submission order."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def all_inputs(n: int) -> Iterator[str]:
    """Every bit string of length n in lexicographic order."""
    for bits in itertools.product("01", repeat=n):
        yield "".join(bits)


def ordered_map(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """Map in-process for one job, else over a process pool; output order follows input order."""
    materialized = list(items)
    if jobs <= 1 or len(materialized) <= 1:
        return [func(item) for item in materialized]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, materialized))
