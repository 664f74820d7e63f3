"""Run configuration for the end-to-end pipeline (JSON files)."""

from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, fields

from .errors import ConfigError, DcartError
from .geometry import SystemGeometry, default_n_phi, n_rho_from_q
from .image import ImageGrid, default_center
from .inversion import EXTERIOR_MODES
from .phantom import PHANTOMS


@dataclass
class GeometryConfig:
    R: float
    rho_max: float
    n_rho: int | None = None
    q: float | None = None
    n_phi: int | None = None
    arc_step: float = 1.0
    epsilon: float = 1.0


@dataclass
class GridConfig:
    n: int
    pixel_size: float = 1.0
    center: tuple[float, float] | None = None


@dataclass
class RunConfig:
    """Everything one ``pipeline`` run needs.

    Exactly one of ``geometry.n_rho`` and ``geometry.q`` must be set.  Unset
    ``n_phi`` and ``grid.center`` take their documented defaults when the
    config is resolved.
    """

    geometry: GeometryConfig
    grid: GridConfig
    phantom: str = "shepp-logan"
    snr_db: float | None = None
    seed: int | None = None
    exterior: str = "quadrature"
    output_dir: str = "out"

    def __post_init__(self):
        g = self.geometry
        if (g.n_rho is None) == (g.q is None):
            raise ConfigError("geometry.n_rho", "give exactly one of n_rho and q")
        if self.phantom not in PHANTOMS:
            raise ConfigError("phantom", f"unknown phantom {self.phantom!r}; choose from {sorted(PHANTOMS)}")
        if self.exterior not in EXTERIOR_MODES:
            raise ConfigError("exterior", f"must be one of {EXTERIOR_MODES}")
        if self.snr_db is not None and self.seed is None:
            raise ConfigError("seed", "a seed is required when snr_db is set")
        if self.grid.center is not None:
            self.grid.center = tuple(float(c) for c in self.grid.center)
        try:
            self.system_geometry()
            self.image_grid()
        except ConfigError:
            raise
        except DcartError as exc:
            raise ConfigError("geometry", str(exc)) from None

    def resolved_n_phi(self) -> int:
        g = self.geometry
        return default_n_phi(g.R) if g.n_phi is None else int(g.n_phi)

    def resolved_n_rho(self) -> int:
        g = self.geometry
        if g.n_rho is not None:
            return int(g.n_rho)
        return n_rho_from_q(g.q, self.grid.n, self.resolved_n_phi())

    def system_geometry(self) -> SystemGeometry:
        g = self.geometry
        return SystemGeometry(g.R, g.rho_max, self.resolved_n_rho(), self.resolved_n_phi(),
                              g.arc_step, g.epsilon)

    def image_grid(self) -> ImageGrid:
        gr = self.grid
        center = gr.center
        if center is None:
            center = default_center(gr.n, self.geometry.R, gr.pixel_size)
        return ImageGrid(gr.n, gr.pixel_size, center)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["grid"]["center"] is not None:
            d["grid"]["center"] = list(d["grid"]["center"])
        return d

    def resolved_dict(self) -> dict:
        """As :meth:`to_dict` with every default filled in.

        ``q`` is replaced by the ``n_rho`` it resolves to, so the result
        parses back into an equivalent config.
        """
        d = self.to_dict()
        d["geometry"]["n_rho"] = self.resolved_n_rho()
        d["geometry"]["q"] = None
        d["geometry"]["n_phi"] = self.resolved_n_phi()
        d["grid"]["center"] = list(self.image_grid().center)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "config must be a mapping")
        d = dict(d)
        for key in ("geometry", "grid"):
            if key not in d:
                raise ConfigError(key, "missing section")
        geometry = _section(GeometryConfig, d.pop("geometry"), "geometry")
        grid = _section(GridConfig, d.pop("grid"), "grid")
        _check_keys(cls, d, "", skip={"geometry", "grid"})
        for key, kind in (("snr_db", float), ("seed", int)):
            if d.get(key) is not None:
                d[key] = _coerce(d[key], kind, key)
        for key in ("phantom", "exterior", "output_dir"):
            if key in d and not isinstance(d[key], str):
                raise ConfigError(key, "must be a string")
        return cls(geometry=geometry, grid=grid, **d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


_TYPES = {
    "R": float, "rho_max": float, "n_rho": int, "q": float, "n_phi": int,
    "arc_step": float, "epsilon": float, "n": int, "pixel_size": float,
}


def _coerce(value, kind, key):
    if isinstance(value, bool):
        raise ConfigError(key, f"expected {kind.__name__}, got bool")
    if kind is int:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _check_keys(cls, d, prefix, skip=()):
    known = {f.name for f in fields(cls)} - set(skip)
    for key in d:
        if key not in known:
            raise ConfigError(prefix + key, "unknown key")


def _section(cls, d, name):
    if not isinstance(d, dict):
        raise ConfigError(name, "must be a mapping")
    d = dict(d)
    _check_keys(cls, d, name + ".")
    for f in fields(cls):
        key = f"{name}.{f.name}"
        if f.name not in d:
            if f.default is MISSING:
                raise ConfigError(key, "required")
            continue
        value = d[f.name]
        if value is None:
            continue
        if f.name == "center":
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigError(key, "expected [x, y]")
            d[f.name] = tuple(_coerce(v, float, key) for v in value)
        else:
            d[f.name] = _coerce(value, _TYPES[f.name], key)
    return cls(**d)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return RunConfig.from_json(fh.read())


def dump_config(config: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config.to_json() + "\n")
