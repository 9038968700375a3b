"""Fourier-domain damped Green kernel and its zero-padded FFT application.

The kernel is the continuum symbol ``1 / (|kappa|^2 - k0^2 - i*epsilon)``
sampled on the DFT wavenumbers of a padded grid, so that applying it is a
circular convolution on the padded grid followed by a crop. Forward FFTs are
unscaled and inverse FFTs carry ``1/(Nx*Ny)``.

``scipy.fft`` keeps no mutable global plan state, so kernels can be shared
between threads and :func:`apply_resolvent` can run concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.fft

from .errors import InvalidParameterError, ShapeError
from .medium import Grid2D

__all__ = ["PaddedGrid", "SpectralKernel", "smooth_size", "plan_padding", "default_padding",
           "wavenumbers", "build_kernel", "apply_resolvent"]


@dataclass(frozen=True)
class PaddedGrid:
    base: Grid2D
    pad_x: int
    pad_y: int
    Nx: int
    Ny: int

    def __post_init__(self):
        if self.pad_x < 0 or self.pad_y < 0:
            raise InvalidParameterError("padding must be nonnegative")
        if self.Nx < self.base.nx + 2 * self.pad_x or self.Ny < self.base.ny + 2 * self.pad_y:
            raise InvalidParameterError("padded size smaller than base plus padding")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.Ny, self.Nx)

    @property
    def interior(self) -> Tuple[slice, slice]:
        """Slices of the padded array occupied by the base grid."""
        return (slice(self.pad_y, self.pad_y + self.base.ny), slice(self.pad_x, self.pad_x + self.base.nx))


def smooth_size(n: int) -> int:
    """Smallest ``2^a 3^b 5^c`` not below ``n``."""
    return scipy.fft.next_fast_len(int(n), real=True)


def _pad_axis(n: int, min_pad: int) -> Tuple[int, int]:
    total = smooth_size(n + 2 * min_pad)
    return min_pad + (total - n - 2 * min_pad) // 2, total


def plan_padding(grid: Grid2D, min_pad_cells: int, min_pad_cells_y: int = None) -> PaddedGrid:
    """Pad every side by at least ``min_pad_cells`` and round up to an FFT-friendly size.

    Leftover cells from the rounding are split between both sides.
    """
    if min_pad_cells < 0 or (min_pad_cells_y is not None and min_pad_cells_y < 0):
        raise InvalidParameterError("padding must be nonnegative")
    py_min = min_pad_cells if min_pad_cells_y is None else min_pad_cells_y
    px, nx = _pad_axis(grid.nx, min_pad_cells)
    py, ny = _pad_axis(grid.ny, py_min)
    return PaddedGrid(grid, px, py, nx, ny)


def default_padding(grid: Grid2D, layer_cells: Tuple[int, int], physical_shape: Tuple[int, int]) -> PaddedGrid:
    """Padding of one layer thickness plus a quarter of the physical extent per side.

    ``layer_cells`` is ``(cells_x, cells_y)`` and ``physical_shape`` is
    ``(ny, nx)`` of the physical domain inside ``grid``.
    """
    ny, nx = physical_shape
    return plan_padding(grid, layer_cells[0] + nx // 4, layer_cells[1] + ny // 4)


def wavenumbers(pgrid: PaddedGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Angular DFT wavenumbers ``(ky, kx)`` of the padded grid, FFT ordering."""
    kx = 2 * np.pi * scipy.fft.fftfreq(pgrid.Nx, pgrid.base.dx)
    ky = 2 * np.pi * scipy.fft.fftfreq(pgrid.Ny, pgrid.base.dy)
    return ky, kx


@dataclass(frozen=True)
class SpectralKernel:
    grid: PaddedGrid
    k0: float
    epsilon: float
    ghat: np.ndarray


def build_kernel(pgrid: PaddedGrid, k0: float, epsilon: float) -> SpectralKernel:
    """Sample ``1/(|kappa|^2 - k0^2 - i eps)`` on the padded wavenumber grid."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    ky, kx = wavenumbers(pgrid)
    kk = ky[:, None] ** 2 + kx[None, :] ** 2
    ghat = 1.0 / (kk - k0 ** 2 - 1j * epsilon)
    ghat.setflags(write=False)
    return SpectralKernel(pgrid, float(k0), float(epsilon), ghat)


def apply_resolvent(kernel: SpectralKernel, u: np.ndarray, workers: int = None) -> np.ndarray:
    """Apply the damped background resolvent to ``u`` on the base grid.

    Zero-pads ``u``, multiplies its spectrum by the kernel and crops the
    result back to the base grid. Allocates its own buffers.
    """
    pg = kernel.grid
    u = np.asarray(u)
    if u.shape != pg.base.shape:
        raise ShapeError(f"field shape {u.shape} does not match grid {pg.base.shape}")
    buf = np.zeros(pg.shape, dtype=complex)
    inner = pg.interior
    buf[inner] = u
    spec = scipy.fft.fft2(buf, overwrite_x=True, workers=workers)
    spec *= kernel.ghat
    return scipy.fft.ifft2(spec, overwrite_x=True, workers=workers)[inner].copy()
