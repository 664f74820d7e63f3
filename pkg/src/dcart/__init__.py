"""Radon transform on double circular arcs for uncollimated Compton scattering tomography."""

import numba as _numba

# the TBB shipped in some images is too old and only produces a warning
_numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__version__ = "0.1.0"
