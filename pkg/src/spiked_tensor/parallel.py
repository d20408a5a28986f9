"""Order-preserving parallel map; results never depend on the thread count."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "SPIKED_TENSOR_THREADS"


def resolve_threads(flag_value: int | None) -> int:
    """Thread count: the environment variable overrides the CLI flag."""
    env = os.environ.get(ENV_THREADS)
    if env is not None and env.strip():
        return max(1, int(env))
    return max(1, flag_value or 1)


def parallel_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
