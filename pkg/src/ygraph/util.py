"""Small shared helpers."""

import os


def worker_count() -> int:
    """Parallelism cap from YGRAPH_THREADS (defaults to the CPU count)."""
    raw = os.environ.get("YGRAPH_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)
