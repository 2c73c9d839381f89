"""Bounded thread pool for batch evaluations (trial pools, sphere samples)."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar


log = logging.getLogger(__name__)

ENV_THREADS = "GRAPHLOG_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Read ``GRAPHLOG_THREADS``; unset or invalid means one worker."""

    raw = os.environ.get(ENV_THREADS)
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        log.warning("Ignoring %s=%r: not an integer", ENV_THREADS, raw)
        return 1
    return max(1, count)


def map_ordered(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply ``fn`` to every item; results keep the input order."""

    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


__all__ = ["ENV_THREADS", "worker_count", "map_ordered"]
