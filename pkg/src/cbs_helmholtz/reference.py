"""Independent reference solutions: analytic 2D Green's function and FDFD with PML.

FDFD discretization
-------------------
The Helmholtz operator ``lap(psi) + k^2 psi = -S`` is discretized with the
compact fourth-order 9-point scheme

    Dxx + Dyy + (hx^2 + hy^2)/12 Dxx Dyy        (Laplacian)
    I + hx^2/12 Dxx + hy^2/12 Dyy               (mass operator B)

with ``B`` applied to both the ``k^2`` term and the source. For ``hx == hy``
the Laplacian part is the isotropic 9-point stencil ``(2/3) L5 + (1/3) Lrot``
(edge weight 4, corner weight 1, centre -20, over ``6 h^2``).

The PML replaces ``d/dx`` by ``(1/s_x) d/dx`` with ``s_x = 1 + i sigma_x / omega``.
Multiplying the stretched equation by ``s_x s_y`` keeps the matrix complex
symmetric. The variable ``k^2`` term is written as ``diag(k) B diag(k)`` for
the same reason. The grid is closed by ``psi = 0`` one cell beyond the collar.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
import scipy.special

from .errors import InvalidParameterError, ShapeError, SingularityError, SolverError
from .medium import Grid2D, MediumModel
from .solver import SourceSpec, point_source

log = logging.getLogger(__name__)

__all__ = ["analytic_green_2d", "analytic_point_source_field", "PmlSpec", "FdfdSystem",
           "pml_profile", "helmholtz_matrix", "fdfd_assemble", "fdfd_solve"]


def analytic_green_2d(k, r):
    """Outgoing 2D Green's function ``(i/4) H0^(1)(k r)``.

    Solves ``(lap + k^2) g = -delta``. ``k`` may be complex with
    ``Im k >= 0``; the field then decays like ``exp(-Im(k) r)``.
    """
    k = np.asarray(k, dtype=complex)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise SingularityError("the 2D Green's function is singular at r = 0")
    if np.any(k.imag < 0):
        raise InvalidParameterError("Im k must be nonnegative for the outgoing branch")
    out = 0.25j * scipy.special.hankel1(0, k * r)
    return complex(out) if out.ndim == 0 else out


def analytic_point_source_field(grid: Grid2D, velocity: float, omega: float,
                                source: SourceSpec) -> np.ndarray:
    """Free-space field of a point source on ``grid``; the source cell is set to 0."""
    ix, iy = source.position
    xs, ys = grid.x[ix], grid.y[iy]
    r = np.hypot(grid.x[None, :] - xs, grid.y[:, None] - ys)
    out = np.zeros(grid.shape, dtype=complex)
    mask = r > 0
    out[mask] = source.amplitude * analytic_green_2d(omega / velocity, r[mask])
    return out


@dataclass(frozen=True)
class PmlSpec:
    """Perfectly matched layer collar.

    ``sigma(d) = sigma_max (d / L)^order`` at depth ``d`` into a collar of
    width ``L``. With ``sigma_max=None`` the value
    ``(order + 1) c_max ln(1/R) / (2 L)`` is used, ``R`` being
    ``reflection``. ``sigma_max=0`` turns the stretching off.
    """

    thickness_cells: int = 20
    sigma_max: Optional[float] = None
    profile_order: int = 2
    reflection: float = 1e-6

    def __post_init__(self):
        if not (int(self.thickness_cells) == self.thickness_cells and self.thickness_cells >= 1):
            raise InvalidParameterError("PML thickness must be a positive integer")
        if self.sigma_max is not None and not self.sigma_max >= 0:
            raise InvalidParameterError("sigma_max must be nonnegative")
        if not (int(self.profile_order) == self.profile_order and self.profile_order >= 1):
            raise InvalidParameterError("profile_order must be an integer >= 1")
        if not 0 < self.reflection < 1:
            raise InvalidParameterError("reflection must lie in (0, 1)")

    def resolved_sigma_max(self, c_max: float, spacing: float) -> float:
        if self.sigma_max is not None:
            return float(self.sigma_max)
        width = self.thickness_cells * spacing
        return (self.profile_order + 1) * c_max * np.log(1 / self.reflection) / (2 * width)


@dataclass(frozen=True)
class FdfdSystem:
    grid: Grid2D
    matrix: sps.csr_matrix
    rhs: np.ndarray
    pml: PmlSpec
    interior: Tuple[slice, slice]
    omega: float


def pml_profile(n_inner: int, pml: PmlSpec, spacing: float, sigma_max: float, omega: float):
    """Stretch factors at nodes and at half nodes along one axis.

    Returns ``(s_nodes, s_half)`` of lengths ``n`` and ``n + 1`` where
    ``s_half[i]`` sits at ``i - 1/2`` and ``n = n_inner + 2 * thickness``.
    """
    m = pml.thickness_cells
    n = n_inner + 2 * m
    width = m * spacing
    lo, hi = m * spacing, (m + n_inner - 1) * spacing

    def stretch(x):
        d = np.maximum(np.maximum(lo - x, x - hi), 0.0)
        return 1.0 + 1j * sigma_max * (d / width) ** pml.profile_order / omega

    return stretch(np.arange(n) * spacing), stretch((np.arange(n + 1) - 0.5) * spacing)


def _second_difference(s_half: np.ndarray, h: float) -> sps.csr_matrix:
    # d/dx (1/s d/dx) with psi = 0 beyond both ends
    a = 1.0 / s_half
    main = -(a[:-1] + a[1:]) / h ** 2
    off = a[1:-1] / h ** 2
    return sps.diags([off, main, off], [-1, 0, 1], format="csr")


def helmholtz_matrix(k2: np.ndarray, dx: float, dy: float,
                     stretch_x=None, stretch_y=None, mass: str = "compact"):
    """Sparse 9-point Helmholtz operator and the source operator on a full grid.

    Parameters
    ----------
    k2 : ndarray, shape (ny, nx)
        Squared wavenumber at every node, collar included.
    stretch_x, stretch_y : tuple of ndarray, optional
        ``(s_nodes, s_half)`` from :func:`pml_profile`; identity if omitted.
    mass : {"compact", "diagonal"}
        ``"diagonal"`` drops the fourth-order corrections and uses the
        plain 5-point Laplacian with a diagonal ``k^2`` term.

    Returns
    -------
    A : csr_matrix
    B : csr_matrix
        Operator mapping the source samples to the right-hand side ``b = -B S``.
    """
    ny, nx = k2.shape
    if stretch_x is None:
        stretch_x = (np.ones(nx), np.ones(nx + 1))
    if stretch_y is None:
        stretch_y = (np.ones(ny), np.ones(ny + 1))
    sx, sxh = stretch_x
    sy, syh = stretch_y
    if len(sx) != nx or len(sy) != ny:
        raise ShapeError("stretch profiles do not match the grid")
    Dx = _second_difference(sxh, dx)
    Dy = _second_difference(syh, dy)
    Sx, Sy = sps.diags(sx), sps.diags(sy)
    # row-major flattening of (ny, nx): x is the fast index
    lap = sps.kron(Sy, Dx) + sps.kron(Dy, Sx)
    if mass == "compact":
        lap = lap + (dx * dx + dy * dy) / 12.0 * sps.kron(Dy, Dx)
        B = sps.kron(Sy, Sx) + dx * dx / 12.0 * sps.kron(Sy, Dx) + dy * dy / 12.0 * sps.kron(Dy, Sx)
        kd = sps.diags(np.sqrt(np.asarray(k2, dtype=complex)).ravel())
        A = lap + kd @ B @ kd
    elif mass == "diagonal":
        B = sps.kron(Sy, Sx)
        A = lap + B @ sps.diags(np.asarray(k2, dtype=complex).ravel())
    else:
        raise InvalidParameterError(f"unknown mass option {mass!r}")
    return sps.csr_matrix(A), sps.csr_matrix(B)


def fdfd_assemble(model: MediumModel, omega: float, pml: PmlSpec = PmlSpec(),
                  source: Optional[SourceSpec] = None, mass: str = "compact") -> FdfdSystem:
    """Assemble the FDFD system on the physical grid surrounded by a PML collar.

    The velocity is continued into the collar by edge replication. The
    source (a discrete delta on the physical grid) is optional; without it
    the right-hand side is zero.
    """
    if not omega > 0:
        raise InvalidParameterError("omega must be positive")
    g = model.grid
    m = pml.thickness_cells
    full = g.extended(m, m)
    vel = np.pad(np.asarray(model.velocity), m, mode="edge")
    k2 = (omega / vel) ** 2
    c_max = float(vel.max())
    sx = pml_profile(g.nx, pml, g.dx, pml.resolved_sigma_max(c_max, g.dx), omega)
    sy = pml_profile(g.ny, pml, g.dy, pml.resolved_sigma_max(c_max, g.dy), omega)
    A, B = helmholtz_matrix(k2, g.dx, g.dy, sx, sy, mass)
    interior = (slice(m, m + g.ny), slice(m, m + g.nx))
    if source is None:
        rhs = np.zeros(full.nx * full.ny, dtype=complex)
    else:
        s = point_source(full, source, interior)
        rhs = -(B @ s.ravel())
    return FdfdSystem(full, A, rhs, pml, interior, float(omega))


def _condition_estimate(A, lu=None) -> Optional[float]:
    try:
        if lu is None:
            lu = spla.splu(sps.csc_matrix(A))
        n = A.shape[0]
        inv = spla.LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda x: lu.solve(x, trans="H"),
                                  dtype=complex)
        return float(spla.onenormest(A) * spla.onenormest(inv))
    except Exception:  # noqa: BLE001 - diagnostic only
        return None


def fdfd_solve(system: FdfdSystem, rtol: float = 1e-10) -> np.ndarray:
    """Direct sparse LU solve (SuperLU, COLAMD ordering, partial pivoting).

    Returns the field on the physical domain. Raises :class:`SolverError`
    if the factorization fails or ``||A psi - b|| / ||b||`` exceeds ``rtol``
    after one step of iterative refinement.
    """
    A = sps.csc_matrix(system.matrix)
    b = system.rhs
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SolverError(f"sparse LU failed: {exc}", condition_estimate=None) from exc
    psi = lu.solve(b)
    bn = np.linalg.norm(b)
    if bn == 0:
        return np.zeros(system.grid.shape, dtype=complex)[system.interior]
    res = np.linalg.norm(A @ psi - b) / bn
    if not res <= rtol:
        psi = psi + lu.solve(b - A @ psi)
        res = np.linalg.norm(A @ psi - b) / bn
    if not res <= rtol:
        cond = _condition_estimate(A, lu)
        raise SolverError(f"relative residual {res:.3e} exceeds {rtol:.1e} (condition ~ {cond})",
                          condition_estimate=cond)
    log.debug("FDFD solve residual %.3e", res)
    return psi.reshape(system.grid.shape)[system.interior].copy()
