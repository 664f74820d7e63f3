"""Circular harmonics of sinograms and the harmonic-domain inversion.

Coefficient arrays are ``(n_rho, n_phi)`` complex in numpy FFT column
order; :func:`harmonic_orders` gives the order ``n`` of every column,
``-floor(N/2) .. ceil(N/2)-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryDomainError, SingularWeightError, SymmetryError
from .geometry import SystemGeometry
from .projector import Sinogram

SINGULAR_COS = 1e-12
HERMITIAN_RTOL = 1e-10
TINY = 1e-300


def harmonic_orders(n_phi: int) -> np.ndarray:
    return np.rint(np.fft.fftfreq(n_phi, 1.0 / n_phi)).astype(np.int64)


@dataclass
class HarmonicSpectrum:
    geometry: SystemGeometry
    coeffs: np.ndarray = field(repr=False)

    @property
    def orders(self) -> np.ndarray:
        return harmonic_orders(self.geometry.n_phi)

    def column(self, n: int) -> int:
        return int(np.mod(n, self.geometry.n_phi))

    def component(self, n: int) -> np.ndarray:
        """Coefficients of order ``n`` along the rho grid."""
        return self.coeffs[:, self.column(n)]


def _phase(geometry: SystemGeometry) -> np.ndarray:
    # phi_j starts at dphi, not 0
    return np.exp(-1j * harmonic_orders(geometry.n_phi) * geometry.dphi)


def decompose_phi(sinogram: Sinogram) -> HarmonicSpectrum:
    """``c_n(rho_i) = (1/N_phi) sum_j s[i, j] exp(-i n phi_j)``."""
    g = sinogram.geometry
    c = np.fft.fft(sinogram.values, axis=1) / g.n_phi
    return HarmonicSpectrum(g, c * _phase(g)[None, :])


def recompose_phi(spectrum: HarmonicSpectrum) -> np.ndarray:
    """Inverse of :func:`decompose_phi`; complains if the result is not real."""
    g = spectrum.geometry
    z = np.fft.ifft(spectrum.coeffs / _phase(g)[None, :], axis=1) * g.n_phi
    re_norm = np.linalg.norm(z.real, axis=1)
    im_norm = np.linalg.norm(z.imag, axis=1)
    if np.any(im_norm > HERMITIAN_RTOL * re_norm + 1e-13 * np.sqrt(g.n_phi)):
        worst = float(np.max(im_norm / (re_norm + TINY)))
        raise SymmetryError(f"spectrum is not Hermitian: imaginary residue ratio {worst:.3g}")
    return np.ascontiguousarray(z.real)


def g_weight(n, psi, epsilon: float) -> np.ndarray:
    """Real weight ``cos(n psi) / (eps^2 + cos^2(n psi)) / 2`` applied to each harmonic."""
    c = np.cos(np.multiply.outer(psi, n))
    if epsilon == 0.0:
        if np.any(np.abs(c) < SINGULAR_COS):
            raise SingularWeightError("cos(n psi) vanishes on the grid; use epsilon > 0")
        return 0.5 / c
    return 0.5 * c / (epsilon * epsilon + c * c)


def regularized_G(spectrum: HarmonicSpectrum, epsilon: float | None = None,
                  orders=None) -> HarmonicSpectrum:
    """Weighted harmonics ``G_n``; ``epsilon=0`` is the exact division by ``2 cos(n psi)``.

    ``orders`` restricts the weighting (and the singularity check) to the
    listed harmonics; the other columns are set to zero.
    """
    g = spectrum.geometry
    eps = g.epsilon if epsilon is None else float(epsilon)
    if eps < 0:
        raise GeometryDomainError(f"epsilon must be >= 0, got {eps}")
    if orders is None:
        w = g_weight(spectrum.orders, g.psis, eps)
        return HarmonicSpectrum(g, spectrum.coeffs * w)
    out = np.zeros_like(spectrum.coeffs)
    for n in orders:
        col = spectrum.column(n)
        out[:, col] = spectrum.coeffs[:, col] * g_weight(np.array([n]), g.psis, eps)[:, 0]
    return HarmonicSpectrum(g, out)


def G_matrix(sinogram: Sinogram, epsilon: float | None = None) -> np.ndarray:
    """``G(rho_i, phi_j)`` recomposed from the weighted harmonics of a sinogram."""
    return recompose_phi(regularized_G(decompose_phi(sinogram), epsilon))


@dataclass(frozen=True)
class ConsistencyResidual:
    n: int
    k: int
    residual: float


def consistency_residuals(spectrum: HarmonicSpectrum, n_max: int,
                          tail: bool = False) -> list[ConsistencyResidual]:
    """Normalized moments ``|int G_n(rho) rho^-k drho|`` for ``k = n, n-2, ... > 0``.

    ``spectrum`` must already hold ``G_n`` (see :func:`regularized_G`).
    The integral is the trapezoid rule from ``R`` (where ``G_n = 0``) to
    ``rho_max``, normalized by ``||G_n||_1 R^-k``.  Small values mean the
    data look like they lie in the range of the transform.

    Only ``k >= 2`` are true range conditions: for ``k = 1`` and odd ``n``
    the moment equals ``pi * int f_n(r) dr``, which is not zero in general.

    With ``tail=True`` the integral is continued past ``rho_max`` using the
    large-``rho`` behaviour ``G_n ~ c*rho^-1`` (odd ``n``) or ``G_n ~ c``
    (even ``n``), with ``c`` matched at ``rho_max``.
    """
    g = spectrum.geometry
    rhos = np.concatenate(([g.R], g.rhos))
    out = []
    for n in range(1, int(n_max) + 1):
        Gn = np.concatenate(([0.0], spectrum.component(n)))
        norm1 = np.trapezoid(np.abs(Gn), rhos)
        p = n % 2
        for k in range(n, 0, -2):
            moment = np.trapezoid(Gn * rhos ** (-float(k)), rhos)
            if tail and p + k > 1:
                moment = moment + Gn[-1] * rhos[-1] ** (1.0 - k) / (p + k - 1)
            res = abs(moment) / (norm1 * g.R ** (-float(k)) + TINY)
            out.append(ConsistencyResidual(n, k, float(res)))
    return out


def ch_invert_component(n: int, G_n, r_grid, geometry: SystemGeometry,
                        oversample: int = 4) -> np.ndarray:
    """Harmonic ``f_n(r)`` of the image from ``G_n`` sampled on the rho grid.

    Evaluates ``(1/pi) d/dr int_R^r cosh(n acosh(r/rho)) / (rho sqrt((r/rho)^2-1)) G_n(rho) drho``.
    With ``rho = r/cosh(t)`` the integrand becomes ``cosh(n t)/cosh(t) G_n(r/cosh t)``
    on ``0 <= t <= acosh(r/R)``, which is smooth.  Only ``G_n`` on ``rho <= r``
    is read.  The outer derivative is a finite difference on ``r_grid``.
    """
    r = np.asarray(r_grid, dtype=float)
    R = geometry.R
    if np.any(r <= R) or np.any(r > geometry.rho_max):
        raise GeometryDomainError("reconstruction radii must lie in (R, rho_max]")
    rhos = np.concatenate(([R], geometry.rhos))
    G = np.concatenate(([0.0], np.asarray(G_n)))
    nt = oversample * geometry.n_rho + 1
    F = np.empty(r.shape, dtype=np.result_type(G, float))
    for idx, rv in enumerate(r):
        t = np.linspace(0.0, np.arccosh(rv / R), nt)
        rho = rv / np.cosh(t)
        if np.iscomplexobj(G):
            Gi = np.interp(rho, rhos, G.real) + 1j * np.interp(rho, rhos, G.imag)
        else:
            Gi = np.interp(rho, rhos, G)
        # cosh(n t)/cosh(t) written to avoid overflow for large n t
        kern = np.exp((abs(n) - 1) * t) * (1 + np.exp(-2 * abs(n) * t)) / (1 + np.exp(-2 * t))
        F[idx] = np.trapezoid(kern * Gi, t)
    if r.size < 2:
        raise GeometryDomainError("r_grid needs at least two radii for the derivative")
    return np.gradient(F, r) / np.pi
