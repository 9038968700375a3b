"""Problem setup shared by the CLI and the benchmark tests, plus file output."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .config import RunConfig, serialize_config
from .errors import InvalidModelError, InvalidParameterError
from .fieldio import write_field, write_pgm
from .medium import MediumModel, PotentialField, WavenumberField, build_potential, build_wavenumber_field, select_epsilon
from .metrics import error_maps, source_exclusion_mask
from .reference import PmlSpec, analytic_point_source_field, fdfd_assemble, fdfd_solve
from .solver import ConvergenceHistory, SolverConfig, SourceSpec, point_source, solve_born, solve_cbs
from .spectral import SpectralKernel, build_kernel, default_padding

log = logging.getLogger(__name__)

__all__ = ["CbsProblem", "setup_cbs", "run_iterative", "run_fdfd", "run_analytic", "BenchmarkResult",
           "run_benchmark", "compare", "METHODS"]

METHODS = ("cbs", "born", "fdfd", "analytic")


@dataclass(frozen=True)
class CbsProblem:
    kfield: WavenumberField
    potential: PotentialField
    kernel: SpectralKernel
    source: np.ndarray

    @property
    def interior(self) -> Tuple[slice, slice]:
        return self.kfield.interior


def setup_cbs(model: MediumModel, frequency_hz: float, c0: float, source: SourceSpec,
              epsilon_factor: float = 1.1, epsilon: Optional[float] = None) -> CbsProblem:
    """Build the potential, FFT kernel and source field for one frequency.

    ``c0`` is the reference velocity: it fixes ``k0`` and the layer
    thickness. ``epsilon`` overrides ``epsilon_factor * max|delta|``.
    """
    omega = 2 * np.pi * frequency_hz
    k0 = omega / c0
    kf = build_wavenumber_field(model, omega, reference_velocity=c0)
    delta = kf.k ** 2 - k0 ** 2
    eps = select_epsilon(delta, epsilon_factor) if epsilon is None else float(epsilon)
    pot = build_potential(kf, k0, eps)
    iy, ix = kf.interior
    layer = (ix.start, iy.start)
    pgrid = default_padding(kf.grid, layer, model.grid.shape)
    kernel = build_kernel(pgrid, k0, eps)
    src = point_source(kf.grid, source, kf.interior)
    return CbsProblem(kf, pot, kernel, src)


def run_iterative(problem: CbsProblem, cfg: SolverConfig = SolverConfig(),
                  method: str = "cbs") -> Tuple[np.ndarray, ConvergenceHistory]:
    """Run CBS or Born and return the physical-domain field."""
    solve = {"cbs": solve_cbs, "born": solve_born}.get(method)
    if solve is None:
        raise InvalidParameterError(f"unknown iterative method {method!r}")
    psi, hist = solve(problem.potential, problem.kernel, problem.source, cfg, region=problem.interior)
    return psi[problem.interior].copy(), hist


def run_fdfd(model: MediumModel, frequency_hz: float, source: SourceSpec, pml: PmlSpec = PmlSpec()) -> np.ndarray:
    system = fdfd_assemble(model, 2 * np.pi * frequency_hz, pml, source)
    return fdfd_solve(system)


def run_analytic(model: MediumModel, frequency_hz: float, source: SourceSpec) -> np.ndarray:
    vel = np.asarray(model.velocity)
    if np.ptp(vel) != 0:
        raise InvalidModelError("the analytic solution needs a homogeneous model")
    return analytic_point_source_field(model.grid, float(vel.flat[0]), 2 * np.pi * frequency_hz, source)


def _mask(cfg: RunConfig) -> np.ndarray:
    g = cfg.grid
    return source_exclusion_mask(g.shape, cfg.source.position, 2.0, g.dx, g.dy)


def _solve(cfg: RunConfig, model: MediumModel, method: str):
    t0 = time.perf_counter()
    hist = None
    if method in ("cbs", "born"):
        problem = setup_cbs(model, cfg.frequency_hz, cfg.reference_velocity_m_per_s, cfg.source,
                            cfg.solver.epsilon_factor)
        field, hist = run_iterative(problem, cfg.solver, method)
    elif method == "fdfd":
        field = run_fdfd(model, cfg.frequency_hz, cfg.source, cfg.pml)
    elif method == "analytic":
        field = run_analytic(model, cfg.frequency_hz, cfg.source)
    else:
        raise InvalidParameterError(f"unknown method {method!r}; choose from {METHODS}")
    return field, hist, time.perf_counter() - t0


def _default_reference(model: MediumModel, method: str) -> Optional[str]:
    if method == "analytic":
        return None
    if np.ptp(np.asarray(model.velocity)) == 0:
        return "analytic"
    return None if method == "fdfd" else "fdfd"


@dataclass
class BenchmarkResult:
    method: str
    field: np.ndarray
    history: Optional[ConvergenceHistory]
    report: dict
    paths: dict

    @property
    def diverged(self) -> bool:
        return bool(self.history is not None and self.history.diverged)


def _tag(cfg: RunConfig) -> str:
    return f"{cfg.frequency_hz:g}Hz"


def run_benchmark(cfg: RunConfig, which: str, out_dir=None, reference: Optional[str] = "auto",
                  preview: bool = False, base_dir=None) -> BenchmarkResult:
    """Solve with ``which`` and write the field, convergence CSV and report JSON.

    ``reference="auto"`` compares homogeneous runs against the analytic
    field and heterogeneous CBS/Born runs against FDFD. ``None`` skips the
    comparison.
    """
    if cfg.frequencies_hz[1:]:
        raise InvalidParameterError("run_benchmark handles one frequency; use with_frequency")
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    model = cfg.build_model(base_dir)
    field, hist, elapsed = _solve(cfg, model, which)
    tag = _tag(cfg)
    paths = {"field": str(write_field(out / f"{which}_{tag}.cbsf", field, cfg.grid.dx, cfg.grid.dy))}
    report = {"method": which, "frequency_hz": cfg.frequency_hz, "wall_time_s": elapsed,
              "config": serialize_config(cfg)}
    if hist is not None:
        p = out / f"{which}_{tag}_convergence.csv"
        p.write_text(hist.to_csv())
        paths["convergence"] = str(p)
        report.update(iterations=hist.iterations_run, converged=hist.converged, diverged=hist.diverged,
                      stop_reason=hist.reason, final_residual=hist.residuals[-1] if hist.residuals else None)
    ref_name = _default_reference(model, which) if reference == "auto" else reference
    if ref_name is not None:
        ref_field, _, _ = _solve(cfg, model, ref_name)
        rep = error_maps(field, ref_field, _mask(cfg))
        report["reference"] = ref_name
        report.update(rep.summary())
        paths["amplitude_error"] = str(write_field(out / f"{which}_vs_{ref_name}_{tag}_amplitude.cbsf",
                                                   rep.amplitude_error, cfg.grid.dx, cfg.grid.dy))
        paths["phase_error"] = str(write_field(out / f"{which}_vs_{ref_name}_{tag}_phase.cbsf",
                                               rep.phase_error, cfg.grid.dx, cfg.grid.dy))
    if preview:
        paths["preview"] = str(write_pgm(out / f"{which}_{tag}.pgm", field.real))
    p = out / f"{which}_{tag}_report.json"
    report["files"] = paths
    p.write_text(json.dumps(report, indent=2))
    paths["report"] = str(p)
    log.info("%s at %s: %s", which, tag, {k: report.get(k) for k in ("iterations", "relative_l2")})
    return BenchmarkResult(which, field, hist, report, paths)


def compare(cfg: RunConfig, out_dir=None, base_dir=None) -> dict:
    """Solve with every applicable method and tabulate pairwise relative L2 errors."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = cfg.build_model(base_dir)
    homogeneous = np.ptp(np.asarray(model.velocity)) == 0
    methods = ["cbs", "born", "fdfd"] + (["analytic"] if homogeneous else [])
    fields, rows = {}, {}
    for m in methods:
        fields[m], hist, elapsed = _solve(cfg, model, m)
        rows[m] = {"wall_time_s": elapsed}
        if hist is not None:
            rows[m].update(iterations=hist.iterations_run, converged=hist.converged, diverged=hist.diverged)
            (out / f"{m}_{_tag(cfg)}_convergence.csv").write_text(hist.to_csv())
        write_field(out / f"{m}_{_tag(cfg)}.cbsf", fields[m], cfg.grid.dx, cfg.grid.dy)
    mask = _mask(cfg)
    refs = ["analytic", "fdfd"] if homogeneous else ["fdfd"]
    errors = {}
    for ref in refs:
        for m in methods:
            if m != ref:
                errors[f"{m}_vs_{ref}"] = error_maps(fields[m], fields[ref], mask).relative_l2
    report = {"frequency_hz": cfg.frequency_hz, "methods": rows, "relative_l2": errors,
              "config": serialize_config(cfg)}
    (out / f"compare_{_tag(cfg)}.json").write_text(json.dumps(report, indent=2))
    return report
