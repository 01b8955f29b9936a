"""Worker-count policy for the internally parallel searches.

TENSORLAB_THREADS caps the number of workers; the default is the logical
core count.  All parallel reductions in the package are order-independent
or reduce by first-in-lexicographic-order, so results never depend on the
worker count.
"""

from __future__ import annotations

import os


def worker_count() -> int:
    raw = os.environ.get("TENSORLAB_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, os.cpu_count() or 1)
