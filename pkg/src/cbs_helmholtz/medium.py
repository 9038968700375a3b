"""Grids, velocity models, absorbing boundary layer and scattering potential.

Arrays on a :class:`Grid2D` are stored with shape ``(ny, nx)``: the first
axis is depth (``y``), the second is horizontal distance (``x``). Values live
at cell centres, ``x_i = x0 + (i + 1/2) dx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateModelError, InvalidABLError, InvalidModelError, InvalidParameterError

__all__ = [
    "Grid2D",
    "AblSpec",
    "MediumModel",
    "WavenumberField",
    "PotentialField",
    "taper",
    "abl_cells",
    "build_wavenumber_field",
    "build_potential",
    "select_epsilon",
    "build_layered_model",
    "homogeneous_model",
    "three_layer_model",
]

Interface = Union[None, float, Callable[[np.ndarray], np.ndarray]]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centred Cartesian grid."""

    nx: int
    ny: int
    dx: float
    dy: float
    origin: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise InvalidModelError("grid sizes must be integers")
        if self.nx < 8 or self.ny < 8:
            raise InvalidModelError(f"grid must be at least 8x8, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0) or not (math.isfinite(self.dx) and math.isfinite(self.dy)):
            raise InvalidModelError("grid spacing must be positive and finite")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def extent(self) -> Tuple[float, float]:
        return (self.nx * self.dx, self.ny * self.dy)

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy

    def extended(self, cells_x: int, cells_y: int) -> "Grid2D":
        """Grid grown by ``cells_x``/``cells_y`` cells on every side."""
        return Grid2D(
            self.nx + 2 * cells_x,
            self.ny + 2 * cells_y,
            self.dx,
            self.dy,
            (self.origin[0] - cells_x * self.dx, self.origin[1] - cells_y * self.dy),
        )


@dataclass(frozen=True)
class AblSpec:
    """Viscoacoustic absorbing layer around the physical domain.

    ``q_inv_max`` is the inverse quality factor reached at the outer edge of
    the layer; ``thickness_wavelengths`` is measured in reference wavelengths.
    """

    thickness_wavelengths: float = 3.0
    q_inv_max: float = 0.5
    taper: str = "cosine_squared"

    def __post_init__(self):
        if not self.thickness_wavelengths > 0:
            raise InvalidABLError("layer thickness must be positive")
        if not 0 < self.q_inv_max < 1:
            raise InvalidABLError("q_inv_max must lie in (0, 1)")
        if self.taper not in _TAPERS:
            raise InvalidABLError(f"unknown taper {self.taper!r}; available: {sorted(_TAPERS)}")


@dataclass(frozen=True)
class MediumModel:
    grid: Grid2D
    velocity: np.ndarray
    abl: Optional[AblSpec] = field(default_factory=AblSpec)

    def __post_init__(self):
        vel = np.asarray(self.velocity, dtype=float)
        if vel.shape != self.grid.shape:
            raise InvalidModelError(f"velocity shape {vel.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vel)) or np.any(vel <= 0):
            raise InvalidModelError("velocity must be positive and finite everywhere")
        object.__setattr__(self, "velocity", _readonly(vel))


@dataclass(frozen=True)
class WavenumberField:
    """Complex wavenumber on the computational grid (physical domain plus layer).

    ``interior`` holds the slices selecting the physical domain.
    """

    grid: Grid2D
    k: np.ndarray
    taper: np.ndarray
    interior: Tuple[slice, slice]
    omega: float


@dataclass(frozen=True)
class PotentialField:
    """Scattering potential ``v = k^2 - k0^2 - i*epsilon`` and contrast ``delta = k^2 - k0^2``."""

    k0: float
    epsilon: float
    v: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        v = np.asarray(self.v, dtype=complex)
        delta = np.asarray(self.delta, dtype=complex)
        if v.shape != delta.shape:
            raise InvalidModelError("v and delta must share a shape")
        object.__setattr__(self, "v", _readonly(v))
        object.__setattr__(self, "delta", _readonly(delta))

    @property
    def shape(self):
        return self.v.shape

    @property
    def k_squared(self) -> np.ndarray:
        return self.delta + self.k0 ** 2

    @property
    def contrast_bound(self) -> float:
        """``max |delta|`` over the grid."""
        return float(np.abs(self.delta).max())


def _cosine_squared(s):
    return np.sin(0.5 * np.pi * s) ** 2


_TAPERS = {"cosine_squared": _cosine_squared}


def taper(r, r_in: float, r_out: float, kind: str = "cosine_squared"):
    """Absorbing-layer taper: 0 for ``r <= r_in``, 1 for ``r >= r_out``.

    Accepts scalars or arrays; returns the same kind.
    """
    if not r_in < r_out:
        raise InvalidABLError(f"taper needs r_in < r_out, got {r_in} >= {r_out}")
    s = np.clip((np.asarray(r, dtype=float) - r_in) / (r_out - r_in), 0.0, 1.0)
    out = _TAPERS[kind](s)
    return float(out) if np.ndim(out) == 0 else out


def abl_cells(abl: Optional[AblSpec], wavelength: float, spacing: float) -> int:
    """Number of layer cells needed to cover the requested thickness."""
    if abl is None:
        return 0
    return int(math.ceil(abl.thickness_wavelengths * wavelength / spacing - 1e-9))


def _depth_into_layer(n_inner: int, n_layer: int, spacing: float) -> np.ndarray:
    # distance of each extended-grid cell beyond the outermost physical cell
    i = np.arange(n_inner + 2 * n_layer)
    depth = np.maximum(np.maximum(n_layer - i, i - (n_layer + n_inner - 1)), 0)
    return depth * spacing


def build_wavenumber_field(model: MediumModel, omega: float,
                           reference_velocity: Optional[float] = None) -> WavenumberField:
    """Complex wavenumber ``k = omega / (C sqrt(1 - i Q^-1))`` including the layer.

    The physical grid is grown by the layer on all four sides and the
    velocity is continued into it by edge replication. The taper argument at
    a cell is the larger of its x and y penetration depths.

    Parameters
    ----------
    model : MediumModel
    omega : float
        Angular frequency in rad/s.
    reference_velocity : float, optional
        Sets the reference wavelength used to size the layer. Defaults to the
        slowest velocity in the model.
    """
    if not omega > 0:
        raise InvalidParameterError("omega must be positive")
    vel = np.asarray(model.velocity)
    if np.any(vel <= 0):
        raise InvalidModelError("nonpositive velocity")
    c_ref = float(vel.min()) if reference_velocity is None else float(reference_velocity)
    if not c_ref > 0:
        raise InvalidParameterError("reference velocity must be positive")
    wavelength = 2 * np.pi * c_ref / omega
    g = model.grid
    cx = abl_cells(model.abl, wavelength, g.dx)
    cy = abl_cells(model.abl, wavelength, g.dy)
    ext = g.extended(cx, cy)
    c_ext = np.pad(vel, ((cy, cy), (cx, cx)), mode="edge")

    if model.abl is None:
        t = np.zeros(ext.shape)
        q_inv = t
    else:
        tx = taper(_depth_into_layer(g.nx, cx, g.dx), 0.0, cx * g.dx, model.abl.taper) if cx else np.zeros(ext.nx)
        ty = taper(_depth_into_layer(g.ny, cy, g.dy), 0.0, cy * g.dy, model.abl.taper) if cy else np.zeros(ext.ny)
        t = np.maximum(ty[:, None], tx[None, :])
        q_inv = model.abl.q_inv_max * t
    k = omega / (c_ext * np.sqrt(1.0 - 1j * q_inv))
    interior = (slice(cy, cy + g.ny), slice(cx, cx + g.nx))
    return WavenumberField(ext, _readonly(k), _readonly(t), interior, float(omega))


def build_potential(kfield, k0: float, epsilon: float) -> PotentialField:
    """Split ``k^2`` into ``k0^2`` plus the scattering potential ``v = k^2 - k0^2 - i eps``."""
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    k = kfield.k if isinstance(kfield, WavenumberField) else np.asarray(kfield, dtype=complex)
    k2 = k * k
    scale = max(float(np.abs(k2).max()), k0 ** 2)
    if np.any(k2.imag < -1e-12 * scale):
        raise InvalidModelError("medium has gain somewhere: Im(k^2) < 0")
    delta = k2 - k0 ** 2
    return PotentialField(float(k0), float(epsilon), delta - 1j * epsilon, delta)


def select_epsilon(delta, factor: float = 1.1) -> float:
    """Damping ``factor * max|delta|``; the maximum runs over layer cells too."""
    if not factor >= 1:
        raise InvalidParameterError("epsilon factor must be >= 1")
    bound = float(np.abs(np.asarray(delta)).max())
    if bound == 0.0:
        raise DegenerateModelError(
            "contrast is identically zero; add absorption (e.g. an absorbing layer) "
            "so that a positive damping can be chosen"
        )
    return factor * bound


def _interface_depths(curve: Interface, x: np.ndarray) -> np.ndarray:
    if curve is None:
        return np.full(x.shape, -np.inf)
    if callable(curve):
        return np.broadcast_to(np.asarray(curve(x), dtype=float), x.shape)
    return np.full(x.shape, float(curve))


def build_layered_model(grid: Grid2D, layers: Sequence[Tuple[Interface, float]],
                        abl: Optional[AblSpec] = AblSpec()) -> MediumModel:
    """Piecewise-constant model from stacked layers.

    Each entry is ``(top, velocity)`` where ``top`` is the depth (m) of the
    layer's upper boundary: a number for a flat interface or a callable of
    horizontal position ``x`` (m). The first layer's ``top`` is ignored (it
    starts at the surface; pass ``None``). Cells take the velocity of the
    deepest layer whose top lies above their centre.
    """
    if not layers:
        raise InvalidModelError("need at least one layer")
    x, y = grid.x, grid.y
    vel = np.full(grid.shape, np.nan)
    prev = np.full(x.shape, -np.inf)
    for i, (top, v) in enumerate(layers):
        if not (v > 0 and math.isfinite(v)):
            raise InvalidModelError(f"layer {i} velocity must be positive")
        # the first layer always starts at the surface so every cell gets a value
        z = np.full(x.shape, -np.inf) if i == 0 else _interface_depths(top, x)
        if np.any(z < prev):
            raise InvalidModelError(f"interface {i} crosses the interface above it")
        vel[y[:, None] >= z[None, :]] = v
        prev = z
    return MediumModel(grid, vel, abl)


def homogeneous_model(grid: Grid2D, velocity: float = 2200.0,
                      abl: Optional[AblSpec] = AblSpec()) -> MediumModel:
    return MediumModel(grid, np.full(grid.shape, float(velocity)), abl)


def three_layer_model(grid: Grid2D, velocities=(2000.0, 2400.0, 2800.0),
                      abl: Optional[AblSpec] = AblSpec()) -> MediumModel:
    """Three layers separated by two sinusoidal interfaces.

    Interfaces sit near 35% and 65% of the depth extent with amplitudes of
    5% and 6% of it, at one and two periods across the width.
    """
    width, height = grid.extent
    x0, y0 = grid.origin

    def upper(x):
        return y0 + 0.35 * height + 0.05 * height * np.sin(2 * np.pi * (x - x0) / width)

    def lower(x):
        return y0 + 0.65 * height + 0.06 * height * np.sin(4 * np.pi * (x - x0) / width + 0.5)

    v1, v2, v3 = velocities
    return build_layered_model(grid, [(None, v1), (upper, v2), (lower, v3)], abl)
