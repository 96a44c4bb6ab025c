"""Order-preserving parallel map; results are identical for any worker count.

Large shared state (e.g. all FeatureSets of a run) is shipped once per
worker through the pool initializer instead of once per task.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

_CTX = None


def _init(ctx) -> None:
    global _CTX
    _CTX = ctx


def get_ctx():
    return _CTX


def default_workers() -> int:
    return os.cpu_count() or 1


def pmap(fn, items, workers: int = 1, ctx=None) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        _init(ctx)
        try:
            return [fn(it) for it in items]
        finally:
            _init(None)
    with ProcessPoolExecutor(max_workers=workers, initializer=_init,
                             initargs=(ctx,)) as pool:
        chunk = max(1, len(items) // (4 * workers))
        return list(pool.map(fn, items, chunksize=chunk))
