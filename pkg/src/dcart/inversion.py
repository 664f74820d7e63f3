"""Filtered backprojection for the double-arc transform.

Pipeline: harmonics of the sinogram -> regularized ``G`` -> ``rho dG/drho``
-> Hilbert transform along rho -> weighted backprojection

    f(x, y) = (1/N_phi) sum_j H(r^2/d_j, phi_j) / d_j,   d_j = x cos phi_j + y sin phi_j.

The filtered data are known only for ``rho`` in the sampled window.  In the
default ``exterior="quadrature"`` mode the Hilbert transform of the
zero-extended data is also evaluated outside that window (``d_j <= 0`` or
``r^2/d_j`` beyond the grid) by direct quadrature, where the kernel is
regular.  ``exterior="zero"`` drops those terms instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .errors import SizeError
from .geometry import SystemGeometry
from .harmonics import G_matrix
from .image import Image, ImageGrid
from .projector import Sinogram

EXTERIOR_MODES = ("quadrature", "zero")
# beyond this multiple of rho_max the exterior values come from a table in s = d/r^2
TABLE_START = 1.5
TABLE_DENSITY = 64.0
IMAG_RTOL = 1e-10


def radial_derivative(G, drho: float, rhos=None) -> np.ndarray:
    """Finite-difference ``dG/drho`` along axis 0, times ``rhos`` when given.

    Central differences inside, two-point one-sided differences at both ends.
    """
    G = np.asarray(G, dtype=float)
    if G.shape[0] < 3:
        raise SizeError(f"need at least 3 rho samples, got {G.shape[0]}")
    D = np.empty_like(G)
    D[1:-1] = (G[2:] - G[:-2]) / (2.0 * drho)
    D[0] = (G[1] - G[0]) / drho
    D[-1] = (G[-1] - G[-2]) / drho
    if rhos is not None:
        rhos = np.asarray(rhos, dtype=float)
        D *= rhos.reshape((-1,) + (1,) * (G.ndim - 1))
    return D


def hilbert(signal, axis: int = 0, periodic: bool = False) -> np.ndarray:
    """Discrete Hilbert transform, Fourier symbol ``-i sign(nu)``.

    By default the signal is zero-padded to the next power of two
    ``>= 2L`` (linear rather than circular filtering) and the result is
    cropped back to length ``L``.  ``periodic=True`` filters the signal as
    one period, without padding.  The zero and Nyquist bins are zeroed.
    """
    u = np.asarray(signal, dtype=float)
    L = u.shape[axis]
    if L < 1:
        raise SizeError("empty signal")
    P = L if periodic else 1 << max(1, math.ceil(math.log2(2 * L)))
    U = np.fft.fft(u, n=P, axis=axis)
    symbol = -1j * np.sign(np.fft.fftfreq(P))
    if P % 2 == 0:
        symbol[P // 2] = 0.0
    shape = [1] * u.ndim
    shape[axis] = P
    z = np.fft.ifft(U * symbol.reshape(shape), axis=axis)
    z = np.take(z, np.arange(L), axis=axis)
    scale = np.linalg.norm(u)
    if np.linalg.norm(z.imag) > IMAG_RTOL * scale + 1e-300:
        raise ArithmeticError("Hilbert output has a non-negligible imaginary part")
    return np.ascontiguousarray(z.real)


@dataclass
class FilteredData:
    """``values`` = Hilbert_rho{rho dG/drho} per detector angle; ``weighted`` is its input."""

    geometry: SystemGeometry
    values: np.ndarray = field(repr=False)
    weighted: np.ndarray = field(repr=False)


def filter_G(G, geometry: SystemGeometry) -> FilteredData:
    u = radial_derivative(G, geometry.drho, geometry.rhos)
    return FilteredData(geometry, hilbert(u, axis=0), u)


def filter_sinogram(sinogram: Sinogram, epsilon: float | None = None) -> FilteredData:
    return filter_G(G_matrix(sinogram, epsilon), sinogram.geometry)


def _exterior_tables(f: FilteredData, r_min: float):
    """Hilbert values outside the window from direct quadrature of the zero-extended data.

    Returns the extended node array (rho from ``R`` up to ``TABLE_START*rho_max``)
    and the table of ``W(s) = (1/pi) sum_i u_i drho / (1 - rho_i s)`` over
    ``s`` in ``[-1/r_min, 1/rho_ext]``.
    """
    g = f.geometry
    L = g.n_rho
    rhos = g.rhos
    u = f.weighted
    n_hi = max(1, int(math.ceil((TABLE_START - 1.0) * g.rho_max / g.drho)))
    m_ext = np.concatenate(([-1], np.arange(L, L + n_hi)))
    K = 1.0 / (np.pi * (m_ext[:, None] - np.arange(L)[None, :]))
    direct = K @ u
    H = np.empty((L + 1 + n_hi, g.n_phi))
    H[0] = direct[0]
    H[1:L + 1] = f.values
    H[L + 1:] = direct[1:]
    rho_ext = rhos[0] + (L - 1 + n_hi) * g.drho
    s_lo = -1.0 / r_min
    s_hi = 1.0 / rho_ext
    n_s = max(256, int(math.ceil((s_hi - s_lo) * TABLE_DENSITY * g.rho_max)) + 1)
    s = np.linspace(s_lo, s_hi, n_s)
    Ks = g.drho / (np.pi * (1.0 - np.outer(s, rhos)))
    W = Ks @ u
    return H, rho_ext, W, s_lo, (s_hi - s_lo) / (n_s - 1)


@njit(cache=True, inline="always")
def _interp_row(table, pos, j):
    n = table.shape[0]
    if pos <= 0.0:
        return table[0, j]
    if pos >= n - 1:
        return table[n - 1, j]
    k = int(pos)
    w = pos - k
    return table[k, j] * (1.0 - w) + table[k + 1, j] * w


@njit(cache=True, parallel=True)
def _backproject_kernel(X, Y, R, cphi, sphi, H, t0, dt, t_lo, t_hi,
                        quadrature, W, s_lo, ds, out):
    n_phi = cphi.size
    for p in prange(X.size):
        x = X[p]
        y = Y[p]
        r2 = x * x + y * y
        if r2 <= R * R:
            out[p] = 0.0
            continue
        acc = 0.0
        for j in range(n_phi):
            d = x * cphi[j] + y * sphi[j]
            if d > 0.0:
                t = r2 / d
                if t >= t_lo and t <= t_hi:
                    acc += _interp_row(H, (t - t0) / dt, j) / d
                    continue
            if quadrature:
                acc += _interp_row(W, (d / r2 - s_lo) / ds, j) / r2
        out[p] = acc / n_phi


def backproject_points(filtered: FilteredData, x, y, exterior: str = "quadrature") -> np.ndarray:
    """Weighted backprojection evaluated at arbitrary world points.

    ``x`` and ``y`` are broadcast together; points with ``x^2 + y^2 <= R^2``
    get zero.
    """
    if exterior not in EXTERIOR_MODES:
        raise ValueError(f"exterior must be one of {EXTERIOR_MODES}, got {exterior!r}")
    X, Y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = X.shape
    X = np.ascontiguousarray(X).ravel()
    Y = np.ascontiguousarray(Y).ravel()
    g = filtered.geometry
    out = np.zeros(X.size)
    if X.size == 0:
        return out.reshape(shape)
    phis = g.phis
    if exterior == "quadrature":
        radii = np.hypot(X, Y)
        outside = radii[radii > g.R]
        r_min = max(g.R, float(outside.min())) if outside.size else g.R
        H, rho_ext, W, s_lo, ds = _exterior_tables(filtered, r_min)
        t0, t_lo, t_hi = g.R, g.R, rho_ext
    else:
        H = filtered.values
        W = np.zeros((1, g.n_phi))
        s_lo, ds = 0.0, 1.0
        t0, t_lo, t_hi = g.rhos[0], np.nextafter(g.rhos[0], np.inf), g.rhos[-1]
    _backproject_kernel(X, Y, float(g.R), np.cos(phis), np.sin(phis), np.ascontiguousarray(H),
                        float(t0), float(g.drho), float(t_lo), float(t_hi), exterior == "quadrature",
                        np.ascontiguousarray(W), float(s_lo), float(ds), out)
    return out.reshape(shape)


def backproject(filtered: FilteredData, grid: ImageGrid, exterior: str = "quadrature") -> Image:
    """Weighted backprojection of filtered data onto ``grid``.

    Pixels inside the detector disc are set to zero.
    """
    X, Y = grid.world_coords()
    return Image(grid, backproject_points(filtered, X, Y, exterior))


def reconstruct(sinogram: Sinogram, grid: ImageGrid, epsilon: float | None = None,
                exterior: str = "quadrature") -> Image:
    """Reconstruct the image on ``grid`` from a double-arc sinogram."""
    return backproject(filter_sinogram(sinogram, epsilon), grid, exterior)
