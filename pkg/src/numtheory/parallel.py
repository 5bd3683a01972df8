# src/numtheory/parallel.py
from __future__ import annotations

import logging
import os
from typing import Callable, Iterable, List, Sequence, TypeVar

from joblib import Parallel, delayed

from .constants import THREADS_ENV

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(flag: int | None = None) -> int:
    """Flag wins over the environment; default is a single worker."""
    if flag is not None:
        workers = flag
    else:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV}={raw!r}: expected a positive integer") from None
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def chunk_bounds(lo: int, hi: int, parts: int) -> List[tuple[int, int]]:
    """Split [lo, hi) into at most `parts` contiguous half-open pieces."""
    if hi <= lo:
        return []
    parts = max(1, min(parts, hi - lo))
    step, extra = divmod(hi - lo, parts)
    out = []
    start = lo
    for i in range(parts):
        end = start + step + (1 if i < extra else 0)
        out.append((start, end))
        start = end
    return out


def ordered_map(fn: Callable[[T], R], tasks: Sequence[T] | Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply fn to every task and return results in task order.

    Order is what makes merges deterministic: callers partition work the same way
    for any worker count (or combine associatively), so outputs depend only on
    the inputs.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    logger.debug("dispatching %d tasks to %d workers", len(tasks), workers)
    return Parallel(n_jobs=workers)(delayed(fn)(t) for t in tasks)
