"""Thread-pool map capped by the ``NHJE_THREADS`` environment variable.

The compiled kernels release the GIL, so threads help for sweeps. Results
always come back in input order.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def max_threads() -> int:
    raw = os.environ.get("NHJE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(fn, items):
    items = list(items)
    n = min(max_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
