"""
Worker pool for per-sigma computations.
Jobs run on anyio worker threads under a capacity limiter; results come back
in input order, so output never depends on the thread count.
"""

from typing import Any, Callable, List, Optional, Sequence

import anyio
from anyio import to_thread


async def _run_all(fn: Callable[[Any], Any], items: Sequence[Any], threads: int) -> List[Any]:
    limiter = anyio.CapacityLimiter(threads)
    results: List[Any] = [None] * len(items)
    errors: List[Optional[BaseException]] = [None] * len(items)

    async def run_one(index: int, item: Any):
        try:
            results[index] = await to_thread.run_sync(fn, item, limiter=limiter)
        except Exception as e:
            errors[index] = e

    async with anyio.create_task_group() as tg:
        for index, item in enumerate(items):
            tg.start_soon(run_one, index, item)

    # first failure in input order
    for error in errors:
        if error is not None:
            raise error
    return results


def map_ordered(fn: Callable[[Any], Any], items: Sequence[Any], threads: int = 1) -> List[Any]:
    """
    Apply fn to every item, possibly in parallel.

    Args:
        fn: function of one item, must be thread-safe
        items: inputs
        threads: worker count; 1 or less runs a plain loop

    Returns:
        [fn(item) for item in items], in input order
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return anyio.run(_run_all, fn, items, threads)
