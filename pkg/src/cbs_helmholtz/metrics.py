"""Error norms and error maps between wavefields on the physical domain."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ShapeError, UndefinedReferenceError

__all__ = ["source_exclusion_mask", "relative_l2", "ErrorReport", "error_maps"]


def source_exclusion_mask(shape: Tuple[int, int], position: Tuple[int, int], radius_cells: float = 2.0,
                          dx: float = 1.0, dy: float = 1.0) -> np.ndarray:
    """Boolean mask that is False within ``radius_cells`` cells of the source.

    The radius is measured in units of ``min(dx, dy)``.
    """
    ny, nx = shape
    ix, iy = position
    r = np.hypot((np.arange(nx)[None, :] - ix) * dx, (np.arange(ny)[:, None] - iy) * dy)
    return r > radius_cells * min(dx, dy)


def _prepare(a, b, mask):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"fields differ in shape: {a.shape} vs {b.shape}")
    if mask is None:
        mask = np.ones(a.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape:
        raise ShapeError("mask shape does not match the fields")
    return a, b, mask


def relative_l2(a, b, mask=None) -> float:
    """``||a - b|| / ||b||`` over the cells selected by ``mask``."""
    a, b, mask = _prepare(a, b, mask)
    ref = np.linalg.norm(b[mask])
    if ref == 0:
        raise UndefinedReferenceError("reference field is zero on the comparison mask")
    return float(np.linalg.norm((a - b)[mask]) / ref)


@dataclass(frozen=True)
class ErrorReport:
    """Relative L2 error and pointwise maps; masked-out cells hold 0."""

    relative_l2: float
    amplitude_error: np.ndarray
    phase_error: np.ndarray
    exclusion_radius_cells: float

    def summary(self) -> dict:
        return {
            "relative_l2": self.relative_l2,
            "max_abs_amplitude_error": float(np.abs(self.amplitude_error).max()),
            "max_abs_phase_error_rad": float(np.abs(self.phase_error).max()),
            "exclusion_radius_cells": self.exclusion_radius_cells,
        }


def error_maps(test, ref, mask=None, exclusion_radius_cells: float = 2.0) -> ErrorReport:
    """Amplitude error ``(|test| - |ref|) / max|ref|`` and phase error ``angle(test conj(ref))``.

    ``max|ref|`` is taken over the mask. Phases lie in ``(-pi, pi]``.
    """
    test, ref, mask = _prepare(test, ref, mask)
    l2 = relative_l2(test, ref, mask)
    peak = np.abs(ref[mask]).max()
    amp = np.where(mask, (np.abs(test) - np.abs(ref)) / peak, 0.0)
    phase = np.angle(test * np.conj(ref))
    phase = np.where(phase <= -np.pi, phase + 2 * np.pi, phase)
    phase = np.where(mask, phase, 0.0)
    return ErrorReport(l2, amp, phase, exclusion_radius_cells)
