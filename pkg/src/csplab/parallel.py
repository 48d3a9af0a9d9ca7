"""Order-preserving map over independent tasks, optionally across
processes.  Results are returned in input order, so reductions downstream
are identical for every worker count."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_jobs(value: int | None) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("CSPLAB_JOBS")
    return max(1, int(env)) if env else 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    workers = min(jobs, len(items))
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
