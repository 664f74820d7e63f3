"""Scanning manifold of the fixed-source / rotating-detector system.

The source sits at the origin and the detector D moves on the circle of
radius ``R``.  For a scanning-circle diameter ``rho > R`` and a detector
angle ``phi`` two circles of diameter ``rho`` pass through the source and
D; the parts of them lying outside the detector disc are the arcs
``A_C1`` (``m=1``) and ``A_C2`` (``m=2``).  Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import GammaRangeError, GeometryDomainError

TWO_PI = 2.0 * math.pi


class Arc(IntEnum):
    """Which of the two circular arcs of a double arc."""

    ONE = 1
    TWO = 2


def _arc(m) -> Arc:
    try:
        return Arc(int(m))
    except ValueError:
        raise GeometryDomainError(f"arc id must be 1 or 2, got {m!r}") from None


def _sign(m: Arc) -> float:
    # (-1)**m
    return -1.0 if m == Arc.ONE else 1.0


def default_n_phi(R: float) -> int:
    """Detector positions one pixel of arc length apart: ``round(2*pi*R)``."""
    return max(1, int(round(TWO_PI * R)))


def n_rho_from_q(q: float, n: int, n_phi: int) -> int:
    """Number of diameters giving the redundancy ratio ``q = n_rho*n_phi/n**2``."""
    n_rho = int(round(q * n * n / n_phi))
    if n_rho < 1:
        raise GeometryDomainError(f"Q={q} gives N_rho={n_rho} < 1 for N={n}, N_phi={n_phi}")
    return n_rho


@dataclass(frozen=True)
class SystemGeometry:
    """Detector ring, scan grids and regularization of one acquisition.

    Diameters are ``rho_i = R + i*drho`` for ``i = 1..n_rho`` and detector
    angles are ``phi_j = j*2*pi/n_phi`` for ``j = 1..n_phi``.
    """

    R: float
    rho_max: float
    n_rho: int
    n_phi: int
    arc_step: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise GeometryDomainError(f"R must be > 0, got {self.R}")
        if not self.rho_max > self.R:
            raise GeometryDomainError(f"rho_max must exceed R, got {self.rho_max} <= {self.R}")
        if int(self.n_rho) != self.n_rho or self.n_rho < 1:
            raise GeometryDomainError(f"N_rho must be a positive integer, got {self.n_rho}")
        if int(self.n_phi) != self.n_phi or self.n_phi < 1:
            raise GeometryDomainError(f"N_phi must be a positive integer, got {self.n_phi}")
        if not self.arc_step > 0:
            raise GeometryDomainError(f"arc_step must be > 0, got {self.arc_step}")
        if not self.epsilon >= 0:
            raise GeometryDomainError(f"epsilon must be >= 0, got {self.epsilon}")
        object.__setattr__(self, "n_rho", int(self.n_rho))
        object.__setattr__(self, "n_phi", int(self.n_phi))

    @classmethod
    def from_q(cls, R, rho_max, q, n, n_phi=None, arc_step=1.0, epsilon=1.0):
        n_phi = default_n_phi(R) if n_phi is None else n_phi
        return cls(R, rho_max, n_rho_from_q(q, n, n_phi), n_phi, arc_step, epsilon)

    @property
    def drho(self) -> float:
        return (self.rho_max - self.R) / self.n_rho

    @property
    def dphi(self) -> float:
        return TWO_PI / self.n_phi

    @property
    def rhos(self) -> np.ndarray:
        return self.R + np.arange(1, self.n_rho + 1) * self.drho

    @property
    def phis(self) -> np.ndarray:
        return np.arange(1, self.n_phi + 1) * self.dphi

    @property
    def psis(self) -> np.ndarray:
        return np.arccos(self.R / self.rhos)

    def q_ratio(self, n: int) -> float:
        return self.n_rho * self.n_phi / float(n * n)

    def replace(self, **changes) -> "SystemGeometry":
        fields = dict(R=self.R, rho_max=self.rho_max, n_rho=self.n_rho, n_phi=self.n_phi,
                      arc_step=self.arc_step, epsilon=self.epsilon)
        fields.update(changes)
        return SystemGeometry(**fields)


@dataclass(frozen=True)
class ArcParams:
    m: Arc
    rho: float
    phi: float
    psi: float
    gamma_min: float
    gamma_max: float

    @property
    def center(self) -> tuple[float, float]:
        return arc_center(self.m, self.rho, self.phi)


def psi_of(rho: float, R: float) -> float:
    """Half-opening ``acos(R/rho)`` of a scanning circle, in ``[0, pi/2)``."""
    if not R > 0:
        raise GeometryDomainError(f"R must be > 0, got {R}")
    if rho < R:
        raise GeometryDomainError(
            f"scanning diameter {rho} is smaller than the detector radius {R}")
    return math.acos(R / rho)


def rho_of_omega(omega: float, R: float) -> float:
    """Scanning diameter ``R/sin(omega)`` for a scattering angle in ``[pi/2, pi)``."""
    if not (math.pi / 2 <= omega < math.pi):
        raise GeometryDomainError(f"scattering angle must lie in [pi/2, pi), got {omega}")
    return R / math.sin(omega)


def omega_of_rho(rho: float, R: float) -> float:
    """Inverse of :func:`rho_of_omega`."""
    if rho < R:
        raise GeometryDomainError(
            f"scanning diameter {rho} is smaller than the detector radius {R}")
    return math.pi - math.asin(R / rho)


def compton_energy(E0: float, omega: float, mc2: float = 511.0) -> float:
    """Energy of a photon of initial energy ``E0`` scattered by ``omega``.

    Units of ``E0`` and ``mc2`` must agree (keV with ``mc2=511`` by default).
    """
    if not (E0 > 0 and mc2 > 0):
        raise GeometryDomainError("E0 and mc2 must be positive")
    return E0 / (1.0 + (E0 / mc2) * (1.0 - math.cos(omega)))


def arc_params(m, rho: float, phi: float, R: float) -> ArcParams:
    m = _arc(m)
    psi = psi_of(rho, R)
    lo, hi = _gamma_range(m, phi, psi)
    return ArcParams(m, rho, phi, psi, lo, hi)


def _center_angle(m: Arc, phi: float, psi: float) -> float:
    return phi - _sign(m) * psi


def _gamma_range(m: Arc, phi: float, psi: float) -> tuple[float, float]:
    if m == Arc.ONE:
        return phi - psi, phi + 3.0 * psi
    return phi - 3.0 * psi, phi + psi


def arc_center(m, rho: float, phi: float, R: float) -> tuple[float, float]:
    """Center ``Omega_m`` of arc ``m``; it lies at distance ``rho/2`` from the source."""
    m = _arc(m)
    a = _center_angle(m, phi, psi_of(rho, R))
    return 0.5 * rho * math.cos(a), 0.5 * rho * math.sin(a)


def gamma_range(m, rho: float, phi: float, R: float) -> tuple[float, float]:
    """Parametric interval of arc ``m``; its length is ``4*psi``."""
    return _gamma_range(_arc(m), phi, psi_of(rho, R))


def arc_point(m, rho: float, phi: float, gamma: float, R: float) -> tuple[float, float]:
    """Point of arc ``m`` at parameter ``gamma`` (Cartesian parametrization)."""
    m = _arc(m)
    psi = psi_of(rho, R)
    lo, hi = _gamma_range(m, phi, psi)
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if gamma < lo - tol or gamma > hi + tol:
        raise GammaRangeError(f"gamma={gamma} outside [{lo}, {hi}] for arc {int(m)}")
    a = _center_angle(m, phi, psi)
    h = 0.5 * rho
    return h * (math.cos(a) + math.cos(gamma)), h * (math.sin(a) + math.sin(gamma))


def nominal_dgamma(rho: float, arc_step: float) -> float:
    """Angular step giving ``arc_step`` of arc length on a circle of radius ``rho/2``."""
    return arc_step / (0.5 * rho)


def arc_segments(psi: float, rho: float, arc_step: float) -> int:
    """Number of intervals per arc: ``ceil(4*psi/dgamma)`` (at least one)."""
    return max(1, math.ceil(4.0 * psi / nominal_dgamma(rho, arc_step)))


@dataclass(frozen=True)
class ArcSampleSet:
    m: Arc
    gamma: np.ndarray
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class ArcSampling:
    """Uniform samples of both arcs of one double arc.

    ``dgamma`` is the realised step: the nominal step shrunk so that the
    ``ceil(4*psi/nominal)+1`` samples land exactly on both arc endpoints.
    """

    rho: float
    phi: float
    dgamma: float
    arcs: tuple[ArcSampleSet, ArcSampleSet]

    @property
    def count_per_arc(self) -> int:
        return self.arcs[0].gamma.size


def arc_samples(rho: float, phi: float, arc_step: float, R: float) -> ArcSampling:
    if not arc_step > 0:
        raise GeometryDomainError(f"arc_step must be > 0, got {arc_step}")
    psi = psi_of(rho, R)
    nseg = arc_segments(psi, rho, arc_step)
    dg = 4.0 * psi / nseg
    h = 0.5 * rho
    k = np.arange(nseg + 1)
    sets = []
    for m in (Arc.ONE, Arc.TWO):
        lo, _ = _gamma_range(m, phi, psi)
        a = _center_angle(m, phi, psi)
        g = lo + k * dg
        sets.append(ArcSampleSet(m, g, h * (math.cos(a) + np.cos(g)), h * (math.sin(a) + np.sin(g))))
    return ArcSampling(rho, phi, dg, (sets[0], sets[1]))


def wrap_angle(theta):
    """Map angles to ``[0, 2*pi)``; only used when angles leave the library."""
    return np.mod(theta, TWO_PI)
