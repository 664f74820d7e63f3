"""Reconstruction error metrics and the noise protocol."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError
from .image import Image
from .projector import Sinogram

# Noise stream: numpy PCG64 seeded with the integer seed.  Two blocks of
# uniform doubles (u1, u2) of the sinogram size are drawn in that order and
# mapped by basic Box-Muller, z = sqrt(-2 ln(1-u1)) cos(2 pi u2), row-major.
NOISE_RNG = "numpy.random.PCG64/box-muller-cos/1"


def _arrays(f, f0):
    a = f.values if isinstance(f, Image) else np.asarray(f, dtype=float)
    b = f0.values if isinstance(f0, Image) else np.asarray(f0, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def nmse(f, f0) -> float:
    """``||f - f0||_2^2 / N^2`` (mean squared error over all pixels)."""
    a, b = _arrays(f, f0)
    return float(np.sum((a - b) ** 2) / a.size)


def nmae(f, f0) -> float:
    """``||f - f0||_1 / N^2``."""
    a, b = _arrays(f, f0)
    return float(np.sum(np.abs(a - b)) / a.size)


def noise_sigma(values, snr_db: float) -> float:
    power = float(np.mean(np.square(values)))
    return float(np.sqrt(power / 10.0 ** (snr_db / 10.0)))


def box_muller(shape, seed: int) -> np.ndarray:
    """Standard normals of the documented noise stream."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def add_noise(sinogram: Sinogram, snr_db: float, seed: int) -> Sinogram:
    """Add white Gaussian noise at ``snr_db`` relative to the mean sinogram power."""
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    sigma = noise_sigma(sinogram.values, snr_db)
    noise = box_muller(sinogram.values.shape, seed)
    return sinogram.with_values(sinogram.values + sigma * noise)


def empirical_snr_db(signal, noisy) -> float:
    signal = np.asarray(signal, dtype=float)
    noise = np.asarray(noisy, dtype=float) - signal
    return float(10.0 * np.log10(np.mean(signal ** 2) / np.mean(noise ** 2)))


@dataclass
class MetricsReport:
    nmse: float
    nmae: float
    geometry: dict = field(default_factory=dict)
    Q: float | None = None
    snr_db: float | None = None
    seed: int | None = None
    phantom: str | None = None
    schema: str = "dcart-metrics/1"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Flat ``key=value`` lines; geometry keys are prefixed ``geometry.``."""
        lines = []
        for key, value in self.to_dict().items():
            if key == "geometry":
                for gk, gv in value.items():
                    lines.append(f"geometry.{gk}={_fmt(gv)}")
            else:
                lines.append(f"{key}={_fmt(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_text(cls, text: str) -> "MetricsReport":
        d: dict = {"geometry": {}}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, raw = line.partition("=")
            value = _parse(raw)
            if key.startswith("geometry."):
                d["geometry"][key[len("geometry."):]] = value
            else:
                d[key] = value
        return cls.from_dict(d)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(raw: str):
    if raw == "none":
        return None
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def evaluate(recon: Image, truth: Image, sinogram: Sinogram | None = None, **provenance) -> MetricsReport:
    """Metrics of ``recon`` against ``truth`` plus the acquisition that produced it."""
    geometry = {}
    q = None
    if sinogram is not None:
        g = sinogram.geometry
        geometry = dict(R=g.R, rho_max=g.rho_max, N_rho=g.n_rho, N_phi=g.n_phi,
                        arc_step=g.arc_step, epsilon=g.epsilon)
        q = g.q_ratio(truth.grid.N)
    geometry.update(provenance.pop("geometry", {}))
    return MetricsReport(nmse(recon, truth), nmae(recon, truth), geometry, q, **provenance)
