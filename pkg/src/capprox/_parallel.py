"""Worker-count setting and an order-preserving map.

Work is always split into chunks whose boundaries do not depend on the
worker count, so results are bit-identical for any number of threads.
"""

import contextlib
import contextvars
import os
from concurrent.futures import ThreadPoolExecutor

_threads = contextvars.ContextVar("capprox_threads", default=None)


def get_threads():
    n = _threads.get()
    if n is None:
        env = os.environ.get("CAPPROX_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(n))


def set_threads(n):
    if n is not None and int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _threads.set(None if n is None else int(n))


@contextlib.contextmanager
def threads(n):
    token = _threads.set(int(n))
    try:
        yield
    finally:
        _threads.reset(token)


def ordered_map(fn, items):
    items = list(items)
    n = get_threads()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    ctx = contextvars.copy_context()
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(lambda it: ctx.copy().run(fn, it), items))


def chunks(n_items, size):
    """Fixed-size index ranges covering ``range(n_items)``."""
    return [(i, min(i + size, n_items)) for i in range(0, n_items, size)]
