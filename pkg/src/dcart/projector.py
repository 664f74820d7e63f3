"""Forward transform on double circular arcs.

Each sinogram cell is a trapezoid-weighted Riemann sum of the bilinearly
interpolated image over uniform samples of both arcs.  Samples that fall
outside the disc circumscribing the image grid are skipped without being
evaluated; they would contribute exact zeros, so the result is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy import ndimage

from .errors import DimensionError, GeometryDomainError, SupportError
from .geometry import SystemGeometry, arc_samples
from .image import Image
from .phantom import validate_support

ORACLE_STEP = 1.0 / 16.0


@dataclass
class Sinogram:
    """``values[i, j]`` is the transform at ``(rho_i, phi_j)`` of ``geometry``."""

    geometry: SystemGeometry
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        shape = (self.geometry.n_rho, self.geometry.n_phi)
        if self.values.shape != shape:
            raise DimensionError(f"sinogram shape {self.values.shape} does not match geometry {shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sinogram values must be finite")

    def with_values(self, values) -> "Sinogram":
        return Sinogram(self.geometry, values)


@njit(cache=True, inline="always")
def _bilinear(img, x0, y0, ps, x, y):
    n = img.shape[0]
    fx = (x - x0) / ps
    fy = (y - y0) / ps
    if fx < 0.0 or fy < 0.0 or fx > n - 1 or fy > n - 1:
        return 0.0
    ix = int(fx)
    iy = int(fy)
    if ix > n - 2:
        ix = n - 2
    if iy > n - 2:
        iy = n - 2
    tx = fx - ix
    ty = fy - iy
    return ((img[iy, ix] * (1.0 - tx) + img[iy, ix + 1] * tx) * (1.0 - ty)
            + (img[iy + 1, ix] * (1.0 - tx) + img[iy + 1, ix + 1] * tx) * ty)


@njit(cache=True)
def _cell(img, x0, y0, ps, bx, by, brad, R, rho, phi, step):
    psi = math.acos(R / rho)
    h = 0.5 * rho
    nseg = int(math.ceil(4.0 * psi / (step / h)))
    if nseg < 1:
        nseg = 1
    dg = 4.0 * psi / nseg
    two_pi = 2.0 * math.pi
    total = 0.0
    for m in range(1, 3):
        if m == 1:
            a = phi + psi
            g0 = phi - psi
        else:
            a = phi - psi
            g0 = phi - 3.0 * psi
        ox = h * math.cos(a)
        oy = h * math.sin(a)
        dx = bx - ox
        dy = by - oy
        d0 = math.sqrt(dx * dx + dy * dy)
        if d0 >= h + brad or d0 + brad <= h:
            continue
        if d0 + h <= brad:
            lo = g0 - 1.0
            hi = g0 + 4.0 * psi + 1.0
            period = 0.0
        else:
            beta = math.atan2(dy, dx)
            cd = (h * h + d0 * d0 - brad * brad) / (2.0 * h * d0)
            cd = min(1.0, max(-1.0, cd))
            delta = math.acos(cd)
            lo = beta - delta
            hi = beta + delta
            shift = math.floor((g0 - hi) / two_pi) + 1.0
            lo += shift * two_pi
            hi += shift * two_pi
            period = two_pi
        k_next = 0
        while lo <= g0 + 4.0 * psi + dg and k_next <= nseg:
            klo = int(math.floor((lo - g0) / dg))
            khi = int(math.ceil((hi - g0) / dg))
            if klo < k_next:
                klo = k_next
            if khi > nseg:
                khi = nseg
            for k in range(klo, khi + 1):
                g = g0 + k * dg
                v = _bilinear(img, x0, y0, ps, ox + h * math.cos(g), oy + h * math.sin(g))
                if k == 0 or k == nseg:
                    v *= 0.5
                total += v
            if khi + 1 > k_next:
                k_next = khi + 1
            if period == 0.0:
                break
            lo += period
            hi += period
    return h * dg * total


@njit(cache=True, parallel=True)
def _project_kernel(img, x0, y0, ps, bx, by, brad, R, rhos, phis, step, out):
    n_phi = phis.size
    for cell in prange(rhos.size * n_phi):
        i = cell // n_phi
        j = cell - i * n_phi
        out[i, j] = _cell(img, x0, y0, ps, bx, by, brad, R, rhos[i], phis[j], step)


def _grid_args(image: Image):
    g = image.grid
    x0, y0 = g.origin
    # one pixel of slack beyond the pixel-center hull
    return (image.values, float(x0), float(y0), float(g.pixel_size),
            float(g.center[0]), float(g.center[1]), g.bounding_radius + g.pixel_size)


def sample_image(image: Image, x: float, y: float) -> float:
    """Bilinear value at world point ``(x, y)``; zero outside the pixel-center hull."""
    img, x0, y0, ps = _grid_args(image)[:4]
    return float(_bilinear(img, x0, y0, ps, float(x), float(y)))


def project_one(image: Image, rho: float, phi: float, arc_step: float, R: float) -> float:
    """Integral of the image over the double arc ``(rho, phi)``."""
    if not rho > R:
        raise GeometryDomainError(f"scanning diameter {rho} must exceed R={R}")
    if not arc_step > 0:
        raise GeometryDomainError(f"arc_step must be > 0, got {arc_step}")
    return float(_cell(*_grid_args(image), float(R), float(rho), float(phi), float(arc_step)))


def project(image: Image, geometry: SystemGeometry, unsafe: bool = False) -> Sinogram:
    """Full sinogram over the ``(rho_i, phi_j)`` grid of ``geometry``.

    Images with mass inside the detector disc are refused unless ``unsafe``.
    """
    if not unsafe:
        report = validate_support(image, geometry.R)
        if not report.ok:
            raise SupportError(
                f"image has mass {report.offending_mass:.6g} inside the detector disc R={geometry.R}")
    out = np.empty((geometry.n_rho, geometry.n_phi))
    _project_kernel(*_grid_args(image), float(geometry.R), geometry.rhos, geometry.phis,
                    float(geometry.arc_step), out)
    return Sinogram(geometry, out)


def project_oracle(image: Image, rho: float, phi: float, R: float, arc_step: float = ORACLE_STEP) -> float:
    """Reference value of one cell: fine trapezoid sum, interpolated with scipy.

    Shares no code with the projection kernel beyond the arc parametrization.
    """
    s = arc_samples(rho, phi, arc_step, R)
    g = image.grid
    total = 0.0
    for arc in s.arcs:
        u, v = g.to_pixel(arc.x, arc.y)
        inside = (u >= 0) & (v >= 0) & (u <= g.N - 1) & (v <= g.N - 1)
        vals = ndimage.map_coordinates(image.values, [v, u], order=1, mode="nearest")
        vals = np.where(inside, vals, 0.0)
        total += np.trapezoid(vals)
    return 0.5 * rho * s.dgamma * total
