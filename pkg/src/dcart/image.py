"""Pixel grids placed in the world frame (source at the origin)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, GeometryDomainError

CENTER_MARGIN = 8.0


def default_center(n: int, R: float, pixel_size: float = 1.0) -> tuple[float, float]:
    """Grid center putting the whole square outside the detector disc.

    The square's circumscribed circle clears the disc of radius ``R`` by
    ``CENTER_MARGIN`` pixels.
    """
    return (R + n * pixel_size * math.sqrt(2.0) / 2.0 + CENTER_MARGIN, 0.0)


@dataclass(frozen=True)
class ImageGrid:
    """``N x N`` pixels; pixel ``(u, v)`` sits at ``center + pixel_size*(u-(N-1)/2, v-(N-1)/2)``.

    Arrays attached to a grid are indexed ``[v, u]``, i.e. rows follow world y.
    """

    N: int
    pixel_size: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise GeometryDomainError(f"grid size N must be an integer >= 2, got {self.N}")
        if not self.pixel_size > 0:
            raise GeometryDomainError(f"pixel_size must be > 0, got {self.pixel_size}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def origin(self) -> tuple[float, float]:
        """World position of pixel ``(0, 0)``."""
        off = 0.5 * (self.N - 1) * self.pixel_size
        return self.center[0] - off, self.center[1] - off

    @property
    def axis(self) -> np.ndarray:
        """Pixel-center offsets from the grid center along one axis."""
        return (np.arange(self.N) - 0.5 * (self.N - 1)) * self.pixel_size

    def world_coords(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.center[0] + self.axis, self.center[1] + self.axis)
        return X, Y

    def to_world(self, u, v):
        x0, y0 = self.origin
        return x0 + np.asarray(u) * self.pixel_size, y0 + np.asarray(v) * self.pixel_size

    def to_pixel(self, x, y):
        x0, y0 = self.origin
        return (np.asarray(x) - x0) / self.pixel_size, (np.asarray(y) - y0) / self.pixel_size

    @property
    def bounding_radius(self) -> float:
        """Radius of the circle around ``center`` through the corner pixel centers."""
        return 0.5 * (self.N - 1) * self.pixel_size * math.sqrt(2.0)

    def radii(self) -> np.ndarray:
        X, Y = self.world_coords()
        return np.hypot(X, Y)


@dataclass
class Image:
    """Values of a function on an :class:`ImageGrid` (``values[v, u]``)."""

    grid: ImageGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.N, self.grid.N):
            raise DimensionError(
                f"values shape {self.values.shape} does not match grid {self.grid.N}x{self.grid.N}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("image values must be finite")

    def with_values(self, values) -> "Image":
        return Image(self.grid, values)

    @classmethod
    def zeros(cls, grid: ImageGrid) -> "Image":
        return cls(grid, np.zeros((grid.N, grid.N)))
