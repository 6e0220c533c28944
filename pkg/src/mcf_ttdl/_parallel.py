import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "MCF_TTDL_THREADS"


def thread_count() -> int:
    """Worker cap from MCF_TTDL_THREADS (0 or unset: one per CPU, at most 8)."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV_THREADS} must be >= 0")
    return n or min(os.cpu_count() or 1, 8)


def pmap(fn, items):
    """Order-preserving map; runs in a thread pool when more than one worker is allowed."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
