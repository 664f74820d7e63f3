"""Thread-count control for the numba kernels.

``DCART_NUM_THREADS`` sets the default; ``set_threads`` (the CLI's
``--threads``) overrides it.  Results never depend on the thread count.
"""

from __future__ import annotations

import os

import numba

ENV_VAR = "DCART_NUM_THREADS"


def set_threads(n: int | None = None) -> int:
    if n is None:
        env = os.environ.get(ENV_VAR)
        if not env:
            return numba.get_num_threads()
        n = int(env)
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def get_threads() -> int:
    return numba.get_num_threads()


def max_threads() -> int:
    return numba.config.NUMBA_NUM_THREADS
