import os
from concurrent.futures import ThreadPoolExecutor


def max_threads() -> int:
    try:
        return max(1, int(os.environ.get("COCYCLE_THREADS", "1")))
    except ValueError:
        return 1


def thread_map(fn, items):
    """``list(map(fn, items))``, threaded when ``COCYCLE_THREADS`` > 1; order is kept."""
    items = list(items)
    n = min(max_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
