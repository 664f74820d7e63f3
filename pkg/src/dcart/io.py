"""Exact binary formats (``DCIM1`` images, ``DCSG1`` sinograms) and PGM exports.

Both exact formats are a magic line, ``key=value`` ASCII header lines, a
blank line, then row-major float64 little-endian values.  Floats in the
header are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import BadMagicError, HeaderMismatchError, TruncatedPayloadError
from .geometry import SystemGeometry
from .image import Image, ImageGrid
from .projector import Sinogram

IMAGE_MAGIC = "DCIM1"
SINOGRAM_MAGIC = "DCSG1"
IMAGE_KEYS = ("N", "pixel_size", "cx", "cy")
SINOGRAM_KEYS = ("R", "rho_max", "N_rho", "N_phi", "arc_step")
_LE_F64 = np.dtype("<f8")


def _encode(magic: str, header: dict, values: np.ndarray) -> bytes:
    lines = [magic] + [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in header.items()]
    head = ("\n".join(lines) + "\n\n").encode("ascii")
    return head + np.ascontiguousarray(values, dtype=_LE_F64).tobytes()


def _decode(data: bytes, magic: str, keys):
    first, sep, rest = data.partition(b"\n")
    if not sep or first.decode("ascii", "replace").strip() != magic:
        raise BadMagicError(f"expected magic {magic!r}, found {first[:16]!r}")
    head, sep, payload = rest.partition(b"\n\n")
    if not sep:
        raise TruncatedPayloadError("header is not terminated by a blank line")
    header = {}
    for line in head.decode("ascii").splitlines():
        key, eq, value = line.partition("=")
        if not eq:
            raise HeaderMismatchError(f"malformed header line {line!r}")
        header[key.strip()] = value.strip()
    missing = [k for k in keys if k not in header]
    if missing:
        raise HeaderMismatchError(f"header lacks keys {missing}")
    return header, payload


def _values(payload: bytes, shape) -> np.ndarray:
    expected = int(np.prod(shape)) * 8
    if len(payload) < expected:
        raise TruncatedPayloadError(f"payload has {len(payload)} bytes, header implies {expected}")
    if len(payload) > expected:
        raise HeaderMismatchError(f"payload has {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype=_LE_F64).reshape(shape).astype(np.float64)


def encode_image(image: Image) -> bytes:
    g = image.grid
    header = {"N": g.N, "pixel_size": float(g.pixel_size), "cx": float(g.center[0]), "cy": float(g.center[1])}
    return _encode(IMAGE_MAGIC, header, image.values)


def decode_image(data: bytes) -> Image:
    h, payload = _decode(data, IMAGE_MAGIC, IMAGE_KEYS)
    try:
        grid = ImageGrid(int(h["N"]), float(h["pixel_size"]), (float(h["cx"]), float(h["cy"])))
    except ValueError as exc:
        raise HeaderMismatchError(f"bad image header: {exc}") from None
    return Image(grid, _values(payload, (grid.N, grid.N)))


def encode_sinogram(sino: Sinogram) -> bytes:
    g = sino.geometry
    header = {"R": float(g.R), "rho_max": float(g.rho_max), "N_rho": g.n_rho, "N_phi": g.n_phi,
              "arc_step": float(g.arc_step)}
    return _encode(SINOGRAM_MAGIC, header, sino.values)


def decode_sinogram(data: bytes, epsilon: float = 1.0) -> Sinogram:
    h, payload = _decode(data, SINOGRAM_MAGIC, SINOGRAM_KEYS)
    try:
        geometry = SystemGeometry(float(h["R"]), float(h["rho_max"]), int(h["N_rho"]), int(h["N_phi"]),
                                  float(h["arc_step"]), epsilon)
    except ValueError as exc:
        raise HeaderMismatchError(f"bad sinogram header: {exc}") from None
    return Sinogram(geometry, _values(payload, (geometry.n_rho, geometry.n_phi)))


def write_image(path, image: Image) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_image(image))


def read_image(path) -> Image:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def write_sinogram(path, sino: Sinogram) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_sinogram(sino))


def read_sinogram(path, epsilon: float = 1.0) -> Sinogram:
    with open(path, "rb") as fh:
        return decode_sinogram(fh.read(), epsilon)


def encode_pgm(values, flip: bool = True) -> bytes:
    """16-bit binary PGM (``P5``, maxval 65535, big-endian), min-max scaled.

    ``flip`` puts the largest row index (world +y) at the top of the picture.
    """
    a = np.asarray(values, dtype=float)
    if flip:
        a = a[::-1]
    lo, hi = float(a.min()), float(a.max())
    scaled = np.zeros(a.shape) if hi == lo else (a - lo) / (hi - lo)
    pix = np.rint(scaled * 65535).astype(">u2")
    rows, cols = a.shape
    return f"P5\n{cols} {rows}\n65535\n".encode("ascii") + pix.tobytes()


def write_pgm(path, values, flip: bool = True) -> None:
    if isinstance(values, (Image, Sinogram)):
        values = values.values
    with open(path, "wb") as fh:
        fh.write(encode_pgm(values, flip))


def read_pgm(path) -> np.ndarray:
    """Read back a 16-bit ``P5`` file as written by :func:`write_pgm` (no comments)."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise BadMagicError("not a binary PGM")
    cols, rows, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data[pos + 1:], dtype=dtype, count=rows * cols).reshape(rows, cols)


def ensure_dir(path) -> None:
    if path:
        os.makedirs(path, exist_ok=True)
