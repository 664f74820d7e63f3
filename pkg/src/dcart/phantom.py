"""Test objects rendered on an :class:`~dcart.image.ImageGrid`.

Shepp-Logan, Derenzo and bars phantoms are drawn in the grid's own unit
square ``[-1, 1]^2`` (the full width of the grid), so they follow the grid
wherever it is placed in the world frame.  The Derenzo and bars layouts are
fixed constants (layout version 1); changing them changes every metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import Image, ImageGrid

LAYOUT_VERSION = 1

# (intensity, semi-axis a, semi-axis b, x0, y0, rotation in degrees)
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)

# Derenzo: one triangular array of equal discs per 60-degree sector.
DERENZO_DIAMETERS = (0.16, 0.13, 0.10, 0.08, 0.065, 0.05)
DERENZO_APEX = 0.08
DERENZO_EXTENT = 0.88

# Bars: groups of three vertical bars, gap equal to the bar width.
BAR_WIDTHS = (0.10, 0.075, 0.05, 0.035)
BARS_PER_GROUP = 3
BAR_GROUP_GAP = 0.1
BAR_HALF_LENGTH = 0.6


def unit_coords(grid: ImageGrid) -> tuple[np.ndarray, np.ndarray]:
    """Pixel centers in the grid's unit square, indexed ``[v, u]``."""
    t = (np.arange(grid.N) - 0.5 * (grid.N - 1)) * (2.0 / grid.N)
    X, Y = np.meshgrid(t, t)
    return X, Y


def shepp_logan_value(x: float, y: float) -> float:
    """Point evaluation of the phantom at unit-square coordinates."""
    v = 0.0
    for A, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        th = math.radians(deg)
        c, s = math.cos(th), math.sin(th)
        xr = (x - x0) * c + (y - y0) * s
        yr = -(x - x0) * s + (y - y0) * c
        if (xr / a) ** 2 + (yr / b) ** 2 <= 1.0:
            v += A
    return min(max(v, 0.0), 1.0)


def shepp_logan(grid: ImageGrid) -> Image:
    """Modified (high-contrast) ten-ellipse Shepp-Logan, values in ``[0, 1]``."""
    X, Y = unit_coords(grid)
    P = np.zeros(X.shape)
    for A, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        th = math.radians(deg)
        c, s = math.cos(th), math.sin(th)
        xr = (X - x0) * c + (Y - y0) * s
        yr = -(X - x0) * s + (Y - y0) * c
        P[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += A
    # 1 - 0.8 - 0.2 leaves -5e-17 in floating point
    return Image(grid, np.clip(P, 0.0, 1.0))


@dataclass(frozen=True)
class Disc:
    x: float
    y: float
    diameter: float


def derenzo_layout() -> tuple[Disc, ...]:
    """Disc table of the Derenzo phantom in unit-square coordinates."""
    discs = []
    for sector, d in enumerate(DERENZO_DIAMETERS):
        alpha = math.radians(60.0 * sector + 30.0)
        ux, uy = math.cos(alpha), math.sin(alpha)
        vx, vy = -uy, ux
        pitch = 2.0 * d
        row = 0
        while True:
            along = DERENZO_APEX + d + row * pitch * math.sqrt(3.0) / 2.0
            pts = [(along * ux + (k - row / 2.0) * pitch * vx,
                    along * uy + (k - row / 2.0) * pitch * vy) for k in range(row + 1)]
            if any(math.hypot(px, py) + d / 2.0 > DERENZO_EXTENT for px, py in pts):
                break
            discs.extend(Disc(px, py, d) for px, py in pts)
            row += 1
    return tuple(discs)


def derenzo(grid: ImageGrid) -> Image:
    X, Y = unit_coords(grid)
    P = np.zeros(X.shape)
    for disc in derenzo_layout():
        P[(X - disc.x) ** 2 + (Y - disc.y) ** 2 <= (disc.diameter / 2.0) ** 2] = 1.0
    return Image(grid, P)


def bars_layout() -> tuple[tuple[float, float], ...]:
    """``(x_left, x_right)`` of every bar; bars span ``|y| <= BAR_HALF_LENGTH``."""
    total = sum((2 * BARS_PER_GROUP - 1) * w for w in BAR_WIDTHS) + BAR_GROUP_GAP * (len(BAR_WIDTHS) - 1)
    x = -total / 2.0
    bars = []
    for w in BAR_WIDTHS:
        for _ in range(BARS_PER_GROUP):
            bars.append((x, x + w))
            x += 2.0 * w
        x += BAR_GROUP_GAP - w
    return tuple(bars)


def bars(grid: ImageGrid) -> Image:
    X, Y = unit_coords(grid)
    P = np.zeros(X.shape)
    inside_y = np.abs(Y) <= BAR_HALF_LENGTH
    for x0, x1 in bars_layout():
        P[inside_y & (X >= x0) & (X < x1)] = 1.0
    return Image(grid, P)


def ring(grid: ImageGrid, r_in: float, r_out: float, smooth: bool = True) -> Image:
    """Radially symmetric ring about the source, ``r_in <= |x| <= r_out`` (world units).

    With ``smooth`` the profile is ``sin^2`` across the ring, otherwise an
    indicator.
    """
    r = grid.radii()
    s = np.clip((r - r_in) / (r_out - r_in), 0.0, 1.0)
    if smooth:
        vals = np.sin(np.pi * s) ** 2
    else:
        vals = ((r >= r_in) & (r <= r_out)).astype(float)
    return Image(grid, vals)


PHANTOMS = {
    "shepp-logan": shepp_logan,
    "derenzo": derenzo,
    "bars": bars,
}


def make_phantom(kind: str, grid: ImageGrid) -> Image:
    try:
        return PHANTOMS[kind](grid)
    except KeyError:
        raise ValueError(f"unknown phantom {kind!r}; choose from {sorted(PHANTOMS)}") from None


@dataclass(frozen=True)
class SupportReport:
    ok: bool
    offending_mass: float


def validate_support(image: Image, R: float) -> SupportReport:
    """Check that the image vanishes inside the detector disc (``|x| < R``)."""
    inside = image.grid.radii() < R
    bad = image.values[inside]
    mass = float(np.abs(bad).sum())
    return SupportReport(ok=not np.any(bad != 0.0), offending_mass=mass)
