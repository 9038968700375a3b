"""Binary field files and greyscale previews.

File layout (little endian)::

    offset  0  4s   magic b"CBSF"
    offset  4  u32  version (1)
    offset  8  u32  nx
    offset 12  u32  ny
    offset 16  f64  dx
    offset 24  f64  dy
    offset 32  complex128[ny, nx], row-major, (re, im) interleaved
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Tuple

import numpy as np

from .errors import CBSError, ShapeError

__all__ = ["write_field", "read_field", "write_pgm", "FieldFormatError"]

MAGIC = b"CBSF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")


class FieldFormatError(CBSError, ValueError):
    """A field file is truncated or carries an unknown header."""


def write_field(path, field: np.ndarray, dx: float, dy: float) -> Path:
    path = Path(path)
    field = np.asarray(field)
    if field.ndim != 2:
        raise ShapeError("field must be two-dimensional")
    ny, nx = field.shape
    data = np.ascontiguousarray(field, dtype="<c16")
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, nx, ny, float(dx), float(dy)))
            fh.write(data.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write field file {path}: {exc}") from exc
    return path


def read_field(path) -> Tuple[np.ndarray, float, float]:
    """Return ``(field, dx, dy)``; ``field`` has shape ``(ny, nx)``."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read field file {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: file shorter than the header")
    magic, version, nx, ny, dx, dy = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 16 * nx * ny
    if len(raw) != expected:
        raise FieldFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    field = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(ny, nx).astype(complex)
    return field, dx, dy


def write_pgm(path, image: np.ndarray) -> Path:
    """8-bit binary PGM of a real image, linearly mapped from its min to its max."""
    path = Path(path)
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ShapeError("image must be two-dimensional")
    lo, hi = float(np.nanmin(img)), float(np.nanmax(img))
    scaled = np.zeros(img.shape) if hi == lo else (img - lo) / (hi - lo)
    pix = np.round(np.nan_to_num(scaled) * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())
    return path
