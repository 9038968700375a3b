"""Convergent Born series and classical Born iteration on the FFT resolvent.

Both iterations act on fields over the computational grid (physical domain
plus absorbing layer). The contrast ``V`` already carries the layer, so the
products ``V * psi`` run over every cell.

Convergence is judged by the relative update
``||psi_{n+1} - psi_n|| / ||psi_n||`` measured on the residual region (the
physical domain when one is given).
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import AdmissibilityWarning, InvalidParameterError, NumericalBlowupError, ShapeError
from .medium import Grid2D, PotentialField
from .spectral import SpectralKernel, apply_resolvent

log = logging.getLogger(__name__)

__all__ = ["SolverConfig", "ConvergenceHistory", "SourceSpec", "point_source", "incident_field",
           "cbs_update", "apply_M_once", "solve_cbs", "solve_born", "ls_residual"]

# consecutive residual increases that count as divergence
_RISING_STREAK = 50


@dataclass(frozen=True)
class SolverConfig:
    epsilon_factor: float = 1.1
    max_iterations: int = 1000
    tolerance: float = 1e-6
    divergence_threshold: float = 1e6

    def __post_init__(self):
        if not self.epsilon_factor >= 1:
            raise InvalidParameterError("epsilon_factor must be >= 1")
        if not (int(self.max_iterations) == self.max_iterations and self.max_iterations >= 1):
            raise InvalidParameterError("max_iterations must be a positive integer")
        if not 0 < self.tolerance < 1:
            raise InvalidParameterError("tolerance must lie in (0, 1)")
        if not self.divergence_threshold > 1:
            raise InvalidParameterError("divergence_threshold must exceed 1")


@dataclass
class ConvergenceHistory:
    """Per-iteration record of a fixed-point solve.

    ``residuals[n]`` is the relative update of iteration ``n + 1`` and
    ``times[n]`` the wall-clock seconds elapsed when it finished.
    """

    residuals: List[float] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    reason: str = ""

    @property
    def iterations_run(self) -> int:
        return len(self.residuals)

    def to_csv(self) -> str:
        lines = ["iteration,residual"]
        lines += [f"{i + 1},{r:.17g}" for i, r in enumerate(self.residuals)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SourceSpec:
    """Point source at grid indices ``(ix, iy)`` of the physical grid."""

    position: Tuple[int, int]
    amplitude: complex = 1.0
    kind: str = "point"

    def __post_init__(self):
        if self.kind != "point":
            raise InvalidParameterError(f"unsupported source kind {self.kind!r}")


def point_source(grid: Grid2D, source: SourceSpec,
                 interior: Optional[Tuple[slice, slice]] = None) -> np.ndarray:
    """Discrete delta ``amplitude / (dx dy)`` on ``grid``.

    When ``interior`` is given, ``source.position`` refers to the physical
    sub-grid that the slices select.
    """
    ix, iy = source.position
    oy = interior[0].start if interior is not None else 0
    ox = interior[1].start if interior is not None else 0
    ny = (interior[0].stop - oy) if interior is not None else grid.ny
    nx = (interior[1].stop - ox) if interior is not None else grid.nx
    if not (0 <= ix < nx and 0 <= iy < ny):
        raise InvalidParameterError(f"source {source.position} outside the physical domain {nx}x{ny}")
    s = np.zeros(grid.shape, dtype=complex)
    s[oy + iy, ox + ix] = source.amplitude / (grid.dx * grid.dy)
    return s


def _check(potential: PotentialField, kernel: SpectralKernel, *fields):
    shape = kernel.grid.base.shape
    if potential.shape != shape:
        raise ShapeError(f"potential shape {potential.shape} does not match kernel grid {shape}")
    for f in fields:
        if np.shape(f) != shape:
            raise ShapeError(f"field shape {np.shape(f)} does not match kernel grid {shape}")
    if not np.isclose(potential.epsilon, kernel.epsilon, rtol=1e-12, atol=0):
        raise InvalidParameterError("potential and kernel were built with different epsilon")
    if not np.isclose(potential.k0, kernel.k0, rtol=1e-12, atol=0):
        raise InvalidParameterError("potential and kernel were built with different k0")


def incident_field(kernel: SpectralKernel, source: np.ndarray) -> np.ndarray:
    """Background field ``G_eps S``."""
    return apply_resolvent(kernel, source)


def cbs_update(potential: PotentialField, kernel: SpectralKernel, psi: np.ndarray,
               psi_inc: np.ndarray) -> np.ndarray:
    """One preconditioned step ``psi + (i/eps) V [psi_inc - psi + G(V psi)]``."""
    v = potential.v
    gamma = (1j / potential.epsilon) * v
    return psi + gamma * (psi_inc - psi + apply_resolvent(kernel, v * psi))


def apply_M_once(potential: PotentialField, kernel: SpectralKernel, psi: np.ndarray) -> np.ndarray:
    """Iteration operator ``M psi = gamma G V psi - gamma psi + psi`` with ``gamma = (i/eps) V``.

    Only used to check the fused update against its operator form.
    """
    _check(potential, kernel, psi)
    gamma = (1j / potential.epsilon) * potential.v
    return gamma * apply_resolvent(kernel, potential.v * psi) - gamma * psi + psi


def ls_residual(potential: PotentialField, kernel: SpectralKernel, psi: np.ndarray,
                source: np.ndarray) -> float:
    """``||psi - G V psi - G S|| / ||G S||`` over the whole grid."""
    ginc = apply_resolvent(kernel, source)
    r = psi - apply_resolvent(kernel, potential.v * psi) - ginc
    return float(np.linalg.norm(r) / np.linalg.norm(ginc))


def _iterate(step, psi0, cfg: SolverConfig, region, label: str):
    hist = ConvergenceHistory()
    psi = psi0
    ref_norm = np.linalg.norm(psi0[region])
    best, best_res = psi0, np.inf
    rising = 0
    t0 = time.perf_counter()
    for n in range(int(cfg.max_iterations)):
        new = step(psi)
        if not np.all(np.isfinite(new)):
            raise NumericalBlowupError(f"{label}: non-finite values at iteration {n + 1}")
        d = np.linalg.norm((new - psi)[region])
        cur = np.linalg.norm(psi[region])
        res = d / cur if cur > 0 else (0.0 if d == 0 else np.inf)
        if hist.residuals and res > hist.residuals[-1]:
            rising += 1
        else:
            rising = 0
        hist.residuals.append(float(res))
        hist.times.append(time.perf_counter() - t0)
        psi = new
        if res < best_res:
            best, best_res = new, res
        if res <= cfg.tolerance:
            hist.converged = True
            hist.reason = "tolerance reached"
            return psi, hist
        growth = np.linalg.norm(new[region]) / ref_norm if ref_norm > 0 else 0.0
        if res > cfg.divergence_threshold or growth > cfg.divergence_threshold or rising >= _RISING_STREAK:
            hist.diverged = True
            hist.reason = (f"residual {res:.3g}" if res > cfg.divergence_threshold
                           else f"iterate norm grew by {growth:.3g}" if growth > cfg.divergence_threshold
                           else f"{rising} consecutive residual increases")
            log.info("%s diverged after %d iterations: %s", label, n + 1, hist.reason)
            return best, hist
    hist.reason = "iteration limit reached"
    return psi, hist


def solve_cbs(potential: PotentialField, kernel: SpectralKernel, source: np.ndarray,
              cfg: SolverConfig = SolverConfig(),
              region: Optional[Tuple[slice, slice]] = None) -> Tuple[np.ndarray, ConvergenceHistory]:
    """Convergent Born series for ``psi = G V psi + G S``.

    Starts from the modified incident field ``(i/eps) V G S`` and applies
    :func:`cbs_update` until the relative update on ``region`` drops to
    ``cfg.tolerance``. If the damping is below ``max|delta|`` an
    :class:`AdmissibilityWarning` is issued and the solve proceeds anyway.

    Returns
    -------
    psi : ndarray
        Final iterate, or the iterate with the smallest update if divergence
        was detected.
    history : ConvergenceHistory
    """
    source = np.asarray(source, dtype=complex)
    _check(potential, kernel, source)
    if potential.epsilon < potential.contrast_bound:
        warnings.warn(
            f"epsilon={potential.epsilon:.4g} is below max|delta|={potential.contrast_bound:.4g}; "
            "the iteration may not contract",
            AdmissibilityWarning,
            stacklevel=2,
        )
    region = (slice(None), slice(None)) if region is None else region
    psi_inc = incident_field(kernel, source)
    psi0 = (1j / potential.epsilon) * potential.v * psi_inc

    def step(psi):
        return cbs_update(potential, kernel, psi, psi_inc)

    return _iterate(step, psi0, cfg, region, "CBS")


def solve_born(potential: PotentialField, kernel: SpectralKernel, source: np.ndarray,
               cfg: SolverConfig = SolverConfig(),
               region: Optional[Tuple[slice, slice]] = None) -> Tuple[np.ndarray, ConvergenceHistory]:
    """Classical Born (Neumann) iteration ``psi <- G V psi + G S`` from ``psi = G S``."""
    source = np.asarray(source, dtype=complex)
    _check(potential, kernel, source)
    region = (slice(None), slice(None)) if region is None else region
    psi_inc = incident_field(kernel, source)
    v = potential.v

    def step(psi):
        return apply_resolvent(kernel, v * psi) + psi_inc

    return _iterate(step, psi_inc, cfg, region, "Born")
