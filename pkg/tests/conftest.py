import numpy as np
import pytest

from dcart.geometry import SystemGeometry
from dcart.image import Image, ImageGrid, default_center
from dcart.phantom import ring, shepp_logan
from dcart.projector import project

DESK_N = 128
DESK_R = 64.0
DESK_RHO_MAX = 1250.0
DESK_N_PHI = 402


def desk_geometry(q=10.0, **kw) -> SystemGeometry:
    return SystemGeometry.from_q(DESK_R, DESK_RHO_MAX, q, DESK_N, DESK_N_PHI, **kw)


def desk_grid() -> ImageGrid:
    return ImageGrid(DESK_N, 1.0, default_center(DESK_N, DESK_R))


def blobs(grid: ImageGrid, rotate: float = 0.0) -> Image:
    """Smooth Gaussian blobs evaluated analytically; ``rotate`` turns the object about the origin."""
    X, Y = grid.world_coords()
    c, s = np.cos(-rotate), np.sin(-rotate)
    Xr, Yr = c * X - s * Y, s * X + c * Y
    vals = np.zeros_like(X)
    for (bx, by, w, a) in ((70.0, 10.0, 7.0, 1.0), (55.0, -35.0, 5.0, 0.7), (-20.0, 75.0, 9.0, 0.5)):
        vals += a * np.exp(-((Xr - bx) ** 2 + (Yr - by) ** 2) / (2 * w * w))
    vals[np.hypot(X, Y) < 40.0] = 0.0
    return Image(grid, vals)


@pytest.fixture(scope="session")
def sl_case():
    grid = desk_grid()
    g = desk_geometry()
    f = shepp_logan(grid)
    return f, g, project(f, g)


@pytest.fixture(scope="session")
def ring_case():
    R = 32.0
    grid = ImageGrid(200, 1.0, (0.0, 0.0))
    f = ring(grid, 50.0, 90.0)
    g = SystemGeometry(R, 1000.0, 484, 201)
    return f, g, project(f, g)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict[str, str] = {}


def record(criterion: str, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
