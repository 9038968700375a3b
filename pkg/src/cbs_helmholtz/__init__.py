"""Convergent Born series solver for the 2D Helmholtz equation.

Modules
-------
medium     grids, velocity models and the scattering potential
spectral   FFT-applied damped Green operator
solver     convergent Born series and classical Born iteration
reference  analytic Green's function and FDFD with PML
verify     dense operator checks of the convergence theory
metrics    error norms and maps
fieldio    binary field files
config     JSON run configuration
benchmark  end-to-end runs used by the command line
cli        command line entry point
"""
from .errors import (AdmissibilityWarning, CBSError, DegenerateModelError, InvalidABLError, InvalidModelError,
                     InvalidParameterError, NumericalBlowupError, PreconditionError, ShapeError,
                     SingularityError, SolverError, UndefinedReferenceError)
from .medium import (AblSpec, Grid2D, MediumModel, PotentialField, build_layered_model, build_potential,
                     build_wavenumber_field, homogeneous_model, select_epsilon, taper, three_layer_model)
from .spectral import PaddedGrid, SpectralKernel, apply_resolvent, build_kernel, plan_padding
from .solver import ConvergenceHistory, SolverConfig, SourceSpec, solve_born, solve_cbs
from .reference import PmlSpec, analytic_green_2d, fdfd_assemble, fdfd_solve

__version__ = "0.1.0"
