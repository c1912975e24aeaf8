import os


def max_workers(default=None):
    """Worker cap from ``VLPC_THREADS`` (falls back to the CPU count)."""
    raw = os.environ.get("VLPC_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return default or max(1, os.cpu_count() or 1)
