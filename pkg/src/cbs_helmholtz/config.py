"""JSON run configuration with explicit units in the key names.

Example::

    {
      "model": {"preset": "three-layer", "velocities_m_per_s": [2000, 2400, 2800]},
      "grid": {"nx": 200, "ny": 200, "dx_m": 10.0, "dy_m": 10.0},
      "frequency_hz": 10.0,
      "reference_velocity_m_per_s": 2000.0,
      "source": {"ix": 100, "iy": 20, "amplitude": [1.0, 0.0]},
      "abl": {"thickness_wavelengths": 3.0, "q_inv_max": 0.5, "taper": "cosine_squared"},
      "solver": {"epsilon_factor": 1.1, "max_iterations": 1000, "tolerance": 1e-06,
                 "divergence_threshold": 1000000.0},
      "pml": {"thickness_cells": 20, "sigma_max_per_s": null, "profile_order": 2},
      "output_dir": "out"
    }

``frequency_hz`` may also be a list; each entry is then an independent run.
Model presets are ``homogeneous``, ``three-layer`` and ``file`` (a ``.npy``
velocity array of shape ``(ny, nx)`` given by ``path``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidParameterError
from .medium import AblSpec, Grid2D, MediumModel, homogeneous_model, three_layer_model
from .reference import PmlSpec
from .solver import SolverConfig, SourceSpec

__all__ = ["ModelSpec", "RunConfig", "parse_config", "serialize_config", "load_config", "default_config"]

PRESETS = ("homogeneous", "three-layer", "file")


@dataclass(frozen=True)
class ModelSpec:
    preset: str = "homogeneous"
    velocity_m_per_s: float = 2200.0
    velocities_m_per_s: Tuple[float, float, float] = (2000.0, 2400.0, 2800.0)
    path: Optional[str] = None

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise InvalidParameterError(f"unknown model preset {self.preset!r}; choose from {PRESETS}")
        if self.preset == "file" and not self.path:
            raise InvalidParameterError("the file preset needs a path")

    def to_dict(self) -> dict:
        if self.preset == "homogeneous":
            return {"preset": self.preset, "velocity_m_per_s": self.velocity_m_per_s}
        if self.preset == "three-layer":
            return {"preset": self.preset, "velocities_m_per_s": list(self.velocities_m_per_s)}
        return {"preset": self.preset, "path": self.path}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one benchmark run.

    Defaults give a 2 km x 2 km domain at 10 m spacing (20 points per
    wavelength at 2000 m/s and 10 Hz) with the source 200 m below the top
    centre.
    """

    model: ModelSpec = field(default_factory=ModelSpec)
    grid: Grid2D = field(default_factory=lambda: Grid2D(200, 200, 10.0, 10.0))
    frequencies_hz: Tuple[float, ...] = (10.0,)
    reference_velocity_m_per_s: float = 2000.0
    source: SourceSpec = field(default_factory=lambda: SourceSpec((100, 20)))
    abl: AblSpec = field(default_factory=AblSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    pml: PmlSpec = field(default_factory=PmlSpec)
    output_dir: str = "out"

    def __post_init__(self):
        if not self.frequencies_hz or any(not f > 0 for f in self.frequencies_hz):
            raise InvalidParameterError("frequencies must be positive")
        if not self.reference_velocity_m_per_s > 0:
            raise InvalidParameterError("reference velocity must be positive")
        ix, iy = self.source.position
        if not (0 <= ix < self.grid.nx and 0 <= iy < self.grid.ny):
            raise InvalidParameterError("source lies outside the grid")

    @property
    def frequency_hz(self) -> float:
        return self.frequencies_hz[0]

    def with_frequency(self, f: float) -> "RunConfig":
        return replace(self, frequencies_hz=(float(f),))

    def build_model(self, base_dir: Optional[Path] = None) -> MediumModel:
        m = self.model
        if m.preset == "homogeneous":
            return homogeneous_model(self.grid, m.velocity_m_per_s, self.abl)
        if m.preset == "three-layer":
            return three_layer_model(self.grid, m.velocities_m_per_s, self.abl)
        p = Path(m.path)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        try:
            vel = np.load(p)
        except OSError as exc:
            raise OSError(f"cannot load velocity model {p}: {exc}") from exc
        return MediumModel(self.grid, vel, self.abl)


def _get(d: dict, key: str, default):
    return d[key] if key in d and d[key] is not None else default


def _check_keys(d: dict, allowed, where: str):
    extra = set(d) - set(allowed)
    if extra:
        raise InvalidParameterError(f"unknown keys in {where}: {sorted(extra)}")


def parse_config(data: dict) -> RunConfig:
    """Build a :class:`RunConfig` from a decoded JSON document; missing keys take defaults."""
    base = RunConfig()
    _check_keys(data, ["model", "grid", "frequency_hz", "reference_velocity_m_per_s", "source", "abl",
                       "solver", "pml", "output_dir"], "config")
    md = data.get("model", {})
    _check_keys(md, ["preset", "velocity_m_per_s", "velocities_m_per_s", "path"], "model")
    model = ModelSpec(md.get("preset", "homogeneous"), float(_get(md, "velocity_m_per_s", 2200.0)),
                      tuple(float(v) for v in _get(md, "velocities_m_per_s", (2000.0, 2400.0, 2800.0))),
                      md.get("path"))
    gd = data.get("grid", {})
    _check_keys(gd, ["nx", "ny", "dx_m", "dy_m"], "grid")
    grid = Grid2D(int(_get(gd, "nx", base.grid.nx)), int(_get(gd, "ny", base.grid.ny)),
                  float(_get(gd, "dx_m", base.grid.dx)), float(_get(gd, "dy_m", base.grid.dy)))
    freq = data.get("frequency_hz", list(base.frequencies_hz))
    freqs = tuple(float(f) for f in (freq if isinstance(freq, (list, tuple)) else [freq]))
    sd = data.get("source", {})
    _check_keys(sd, ["ix", "iy", "amplitude"], "source")
    amp = _get(sd, "amplitude", [1.0, 0.0])
    amp = complex(amp[0], amp[1]) if isinstance(amp, (list, tuple)) else complex(amp)
    source = SourceSpec((int(_get(sd, "ix", grid.nx // 2)), int(_get(sd, "iy", grid.ny // 10))), amp)
    ad = data.get("abl", {})
    _check_keys(ad, ["thickness_wavelengths", "q_inv_max", "taper"], "abl")
    abl = AblSpec(float(_get(ad, "thickness_wavelengths", 3.0)), float(_get(ad, "q_inv_max", 0.5)),
                  _get(ad, "taper", "cosine_squared"))
    so = data.get("solver", {})
    _check_keys(so, ["epsilon_factor", "max_iterations", "tolerance", "divergence_threshold"], "solver")
    solver = SolverConfig(float(_get(so, "epsilon_factor", 1.1)), int(_get(so, "max_iterations", 1000)),
                          float(_get(so, "tolerance", 1e-6)), float(_get(so, "divergence_threshold", 1e6)))
    pd = data.get("pml", {})
    _check_keys(pd, ["thickness_cells", "sigma_max_per_s", "profile_order"], "pml")
    sigma = pd.get("sigma_max_per_s")
    pml = PmlSpec(int(_get(pd, "thickness_cells", 20)), None if sigma is None else float(sigma),
                  int(_get(pd, "profile_order", 2)))
    return RunConfig(model, grid, freqs, float(_get(data, "reference_velocity_m_per_s", 2000.0)), source,
                     abl, solver, pml, str(_get(data, "output_dir", "out")))


def serialize_config(cfg: RunConfig) -> dict:
    freqs = list(cfg.frequencies_hz)
    amp = complex(cfg.source.amplitude)
    return {
        "model": cfg.model.to_dict(),
        "grid": {"nx": cfg.grid.nx, "ny": cfg.grid.ny, "dx_m": cfg.grid.dx, "dy_m": cfg.grid.dy},
        "frequency_hz": freqs[0] if len(freqs) == 1 else freqs,
        "reference_velocity_m_per_s": cfg.reference_velocity_m_per_s,
        "source": {"ix": cfg.source.position[0], "iy": cfg.source.position[1],
                   "amplitude": [amp.real, amp.imag]},
        "abl": {"thickness_wavelengths": cfg.abl.thickness_wavelengths, "q_inv_max": cfg.abl.q_inv_max,
                "taper": cfg.abl.taper},
        "solver": {"epsilon_factor": cfg.solver.epsilon_factor, "max_iterations": cfg.solver.max_iterations,
                   "tolerance": cfg.solver.tolerance, "divergence_threshold": cfg.solver.divergence_threshold},
        "pml": {"thickness_cells": cfg.pml.thickness_cells, "sigma_max_per_s": cfg.pml.sigma_max,
                "profile_order": cfg.pml.profile_order},
        "output_dir": cfg.output_dir,
    }


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(data)


def default_config(preset: str = "homogeneous") -> RunConfig:
    return RunConfig(model=ModelSpec(preset))
