"""Dense-matrix checks of the Cayley-transform convergence theory.

Conventions
-----------
``A`` is a real symmetric (or Hermitian) reference operator, for the
Helmholtz case the periodic discrete ``lap + k0^2``. Its damped resolvent
``(A + i eps)^-1`` and Cayley transform ``U = (A - i eps)(A + i eps)^-1``
satisfy ``(A + i eps)^-1 = (I - U) / (2 i eps)``.

The outgoing Green operator used by the iteration is
``G = -(A + i eps)^-1``: its Fourier symbol is ``1/(|kappa|^2 - k0^2 - i eps)``,
the multiplier applied by :mod:`cbs_helmholtz.spectral`. With
``gamma = (i/eps) V`` the iteration operator ``M = gamma G V - gamma + I``
then equals ``(-V^2 + V U V - 2 i eps V + 2 eps^2 I) / (2 eps^2)``.

Admissibility is a statement about the contrast ``delta = V + i eps``: every
entry must satisfy ``|delta| <= eps`` and ``Im delta >= 0``.

Variable-density acoustics
--------------------------
The first-order system for velocity ``v`` and pressure ``p`` on a periodic
staggered grid is written as ``(A + V) psi = f`` with

    A = [[-i w rho0 I, -Grad], [Grad^T, -i w kappa0 I]]
    V = -i w diag(rho - rho0, kappa - kappa0)

so that ``i A`` is Hermitian and ``V`` has no derivative terms. Multiplying
by ``i`` gives ``(H + delta) psi = i f`` with ``H = i A`` and
``delta = i V = w diag(rho - rho0, kappa - kappa0)``, which has the same
structure as the Helmholtz problem and is solved by the same iteration.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import InvalidModelError, InvalidParameterError, PreconditionError

log = logging.getLogger(__name__)

__all__ = [
    "build_reference_operator", "cayley", "check_resolvent_identity", "outgoing_green",
    "cbs_operator_dense", "numerical_range_samples", "numerical_radius", "spectral_radius",
    "AdmissibilityReport", "check_admissibility", "local_inequality", "AcousticSystem",
    "build_acoustic_system", "acoustic_cbs_solve", "run_report",
]

_HERMITIAN_TOL = 1e-12


def build_reference_operator(n: int, variant: str = "laplacian_1d_periodic", k0: float = 1.0,
                             h: float = 1.0) -> np.ndarray:
    """Periodic second-difference Laplacian plus ``k0^2``.

    ``laplacian_1d_periodic`` returns an ``n x n`` matrix and
    ``laplacian_2d_periodic`` an ``n^2 x n^2`` matrix (``n`` points per axis,
    x fastest). Eigenvalues are ``k0^2 - (2/h^2)(1 - cos(2 pi j / n))`` in 1D
    and sums of two such terms minus ``k0^2`` in 2D.
    """
    if int(n) != n or n < 4:
        raise InvalidParameterError("n must be an integer >= 4")
    n = int(n)
    lap = (np.roll(np.eye(n), 1, axis=1) + np.roll(np.eye(n), -1, axis=1) - 2 * np.eye(n)) / h ** 2
    if variant == "laplacian_1d_periodic":
        return lap + k0 ** 2 * np.eye(n)
    if variant == "laplacian_2d_periodic":
        eye = np.eye(n)
        return np.kron(eye, lap) + np.kron(lap, eye) + k0 ** 2 * np.eye(n * n)
    raise InvalidParameterError(f"unknown variant {variant!r}")


def _require_hermitian(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError("operator must be a square matrix")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.conj().T).max() > _HERMITIAN_TOL * scale:
        raise PreconditionError("operator is not self-adjoint")
    return A


def _require_epsilon(epsilon: float):
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")


def cayley(A: np.ndarray, epsilon: float) -> np.ndarray:
    """``U = (A - i eps)(A + i eps)^-1`` for self-adjoint ``A``."""
    A = _require_hermitian(A)
    _require_epsilon(epsilon)
    eye = np.eye(A.shape[0])
    # the two factors commute, so U solves (A + i eps) U = A - i eps
    return scipy.linalg.solve(A + 1j * epsilon * eye, A - 1j * epsilon * eye)


def check_resolvent_identity(A: np.ndarray, epsilon: float) -> float:
    """Max-abs deviation between ``(A + i eps)^-1`` and ``(I - U)/(2 i eps)``."""
    A = _require_hermitian(A)
    eye = np.eye(A.shape[0])
    U = cayley(A, epsilon)
    R = scipy.linalg.inv(A + 1j * epsilon * eye)
    return float(np.abs(R - (eye - U) / (2j * epsilon)).max())


def outgoing_green(A: np.ndarray, epsilon: float) -> np.ndarray:
    """``G = -(A + i eps)^-1``, the dense counterpart of the FFT resolvent."""
    A = _require_hermitian(A)
    _require_epsilon(epsilon)
    return -scipy.linalg.inv(A + 1j * epsilon * np.eye(A.shape[0]))


def _diagonal(V: np.ndarray) -> np.ndarray:
    V = np.asarray(V)
    if V.ndim == 1:
        return V.astype(complex)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise PreconditionError("V must be a square matrix or a vector of diagonal entries")
    d = np.diag(V)
    if np.any(V - np.diag(d)):
        raise PreconditionError("V must be diagonal (a pointwise multiplication)")
    return d.astype(complex)


def cbs_operator_dense(A: np.ndarray, V: np.ndarray, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Iteration operator built two ways.

    Returns
    -------
    M_direct : ndarray
        ``gamma G V - gamma + I`` with ``gamma = (i/eps) V``.
    M_cayley : ndarray
        ``(-V^2 + V U V - 2 i eps V + 2 eps^2 I) / (2 eps^2)``.
    """
    d = _diagonal(V)
    A = _require_hermitian(A)
    if d.shape[0] != A.shape[0]:
        raise PreconditionError("V and A differ in dimension")
    eye = np.eye(A.shape[0])
    G = outgoing_green(A, epsilon)
    U = cayley(A, epsilon)
    gamma = (1j / epsilon) * d
    m_direct = gamma[:, None] * (G * d[None, :]) - np.diag(gamma) + eye
    vuv = d[:, None] * U * d[None, :]
    m_cayley = (np.diag(-d * d - 2j * epsilon * d) + vuv + 2 * epsilon ** 2 * eye) / (2 * epsilon ** 2)
    return m_direct, m_cayley


def numerical_range_samples(M: np.ndarray, trials: int = 1000, rng=None) -> float:
    """Largest ``|<psi, M psi>| / ||psi||^2`` over random complex Gaussian ``psi``."""
    if trials < 100:
        raise InvalidParameterError("use at least 100 trials")
    rng = np.random.default_rng(rng)
    n = M.shape[0]
    psi = rng.standard_normal((n, trials)) + 1j * rng.standard_normal((n, trials))
    quad = np.einsum("ij,ij->j", psi.conj(), M @ psi)
    return float(np.max(np.abs(quad) / np.einsum("ij,ij->j", psi.conj(), psi).real))


def _rotated_top(M: np.ndarray, theta: float) -> float:
    R = np.exp(1j * theta) * M
    return float(scipy.linalg.eigvalsh((R + R.conj().T) / 2, subset_by_index=[M.shape[0] - 1] * 2)[0])


def numerical_radius(M: np.ndarray, angles: int = 64, refine: bool = True) -> float:
    """Numerical radius ``max |<psi, M psi>|`` over unit ``psi``.

    Evaluates the largest eigenvalue of the Hermitian part of ``e^{i t} M``
    on ``angles`` equispaced ``t`` (each value is a support line of the field
    of values) and refines the best angle with a bounded scalar search.
    """
    M = np.asarray(M)
    thetas = np.linspace(0, 2 * np.pi, angles, endpoint=False)
    vals = np.array([_rotated_top(M, t) for t in thetas])
    best = int(np.argmax(vals))
    top = float(vals[best])
    if refine:
        step = 2 * np.pi / angles
        res = scipy.optimize.minimize_scalar(lambda t: -_rotated_top(M, t), method="bounded",
                                             bounds=(thetas[best] - step, thetas[best] + step),
                                             options={"xatol": 1e-10})
        top = max(top, -float(res.fun))
    return top


def spectral_radius(M: np.ndarray) -> float:
    return float(np.abs(scipy.linalg.eigvals(M)).max())


def local_inequality(mu, epsilon: float):
    """Left side minus right side of ``|eps^2 - (mu + i eps)^2| + |mu|^2 <= 2 eps^2``.

    ``mu`` is an eigenvalue of the scattering potential ``V``. Nonpositive
    values mean the inequality holds.
    """
    mu = np.asarray(mu, dtype=complex)
    return np.abs(epsilon ** 2 - (mu + 1j * epsilon) ** 2) + np.abs(mu) ** 2 - 2 * epsilon ** 2


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of :func:`check_admissibility`.

    ``worst_eigenvalue`` is the contrast value (``V + i eps``) that comes
    closest to, or furthest past, the admissible half disk.
    """

    admissible: bool
    worst_eigenvalue: complex
    margin: float
    local_inequality_holds: bool
    max_local_excess: float

    def __bool__(self):
        return self.admissible


def check_admissibility(V, epsilon: float, rtol: float = 1e-12) -> AdmissibilityReport:
    """Pointwise admissibility of a diagonal scattering potential.

    The contrast ``delta = V + i eps`` must satisfy ``|delta| <= eps`` and
    ``Im delta >= 0`` at every entry (up to ``rtol * eps``). The local
    inequality of :func:`local_inequality` is evaluated as well and must
    hold wherever the admissibility conditions do; a violation of that
    implication raises ``AssertionError``.
    """
    _require_epsilon(epsilon)
    mu = _diagonal(V)
    delta = mu + 1j * epsilon
    # signed distance outside the admissible half disk, in units of eps
    excess = np.maximum(np.abs(delta) / epsilon - 1.0, -delta.imag / epsilon)
    worst = int(np.argmax(excess))
    ok = excess <= rtol
    local = local_inequality(mu, epsilon) / epsilon ** 2
    local_ok = local <= 1e3 * rtol
    if np.any(ok & ~local_ok):
        raise AssertionError("admissible entry violates the local inequality")
    return AdmissibilityReport(bool(np.all(ok)), complex(delta[worst]), float(-excess[worst]),
                               bool(np.all(local_ok)), float(local.max()))


@dataclass(frozen=True)
class AcousticSystem:
    """Dense first-order acoustic operators; ``n_velocity`` leading unknowns are velocity."""

    A: np.ndarray
    V: np.ndarray
    omega: float
    n_velocity: int
    n_pressure: int


def _forward_difference(n: int, h: float) -> np.ndarray:
    return (np.roll(np.eye(n), 1, axis=1) - np.eye(n)) / h


def build_acoustic_system(n: int, rho_field, kappa_field, omega: float = 1.0, rho0: float = 1.0,
                          kappa0: float = 1.0, h: float = 1.0, dim: int = 1) -> AcousticSystem:
    """Periodic staggered first-order acoustic operators ``A`` and ``V``.

    Parameters
    ----------
    n : int
        Points per axis.
    rho_field, kappa_field : array_like
        Density and compressibility, shape ``(n,)`` in 1D or ``(n, n)`` in
        2D, real and positive or complex with nonnegative imaginary part
        (loss). In 2D one density value serves both velocity components.
    """
    if dim not in (1, 2):
        raise InvalidParameterError("dim must be 1 or 2")
    if int(n) != n or n < 4:
        raise InvalidParameterError("n must be an integer >= 4")
    if not (omega > 0 and rho0 > 0 and kappa0 > 0):
        raise InvalidParameterError("omega, rho0 and kappa0 must be positive")
    shape = (n,) if dim == 1 else (n, n)
    rho = np.asarray(rho_field, dtype=complex)
    kappa = np.asarray(kappa_field, dtype=complex)
    if rho.shape != shape or kappa.shape != shape:
        raise InvalidModelError(f"material fields must have shape {shape}")
    for name, f in (("density", rho), ("compressibility", kappa)):
        if np.any(f.real <= 0) or np.any(f.imag < 0) or not np.all(np.isfinite(f)):
            raise InvalidModelError(f"{name} must have positive real part and nonnegative imaginary part")
    d = _forward_difference(n, h)
    if dim == 1:
        grad = d
    else:
        eye = np.eye(n)
        grad = np.vstack([np.kron(eye, d), np.kron(d, eye)])
    npr = rho.size
    nv = grad.shape[0]
    A = np.block([[-1j * omega * rho0 * np.eye(nv), -grad],
                  [grad.T.astype(complex), -1j * omega * kappa0 * np.eye(npr)]])
    drho = np.tile((rho - rho0).ravel(), dim)
    v = -1j * omega * np.concatenate([drho, (kappa - kappa0).ravel()])
    return AcousticSystem(A, np.diag(v), float(omega), nv, npr)


def acoustic_cbs_solve(system: AcousticSystem, f: np.ndarray, epsilon: Optional[float] = None,
                       tol: float = 1e-12, max_iterations: int = 5000):
    """Solve ``(A + V) psi = f`` with the dense preconditioned iteration.

    ``epsilon`` defaults to ``1.1 * max|V|``.

    Returns
    -------
    psi : ndarray
    residuals : list of float
        Relative update per iteration.
    """
    H = 1j * system.A
    delta = 1j * np.diag(system.V)
    if epsilon is None:
        bound = float(np.abs(delta).max())
        if bound == 0:
            raise InvalidParameterError("V vanishes; pass epsilon explicitly")
        epsilon = 1.1 * bound
    _require_epsilon(epsilon)
    vc = delta - 1j * epsilon
    G = outgoing_green(H, epsilon)
    gamma = (1j / epsilon) * vc
    M = gamma[:, None] * (G * vc[None, :]) - np.diag(gamma) + np.eye(len(vc))
    rhs = gamma * (G @ (-1j * np.asarray(f, dtype=complex)))
    psi = rhs.copy()
    residuals: List[float] = []
    for _ in range(max_iterations):
        new = M @ psi + rhs
        residuals.append(float(np.linalg.norm(new - psi) / np.linalg.norm(new)))
        psi = new
        if residuals[-1] <= tol:
            break
    return psi, residuals


def _random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (X + X.conj().T) / 2


def random_admissible_contrast(rng, n: int, epsilon: float, min_absorption: float = 0.05) -> np.ndarray:
    """Contrast values in the admissible half disk with ``Im >= min_absorption * eps``."""
    r = epsilon * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, np.pi, n)
    d = r * np.exp(1j * th)
    d = d.real + 1j * np.maximum(d.imag, min_absorption * epsilon)
    big = np.abs(d) > epsilon
    d[big] *= epsilon / np.abs(d[big])
    return d


def run_report(seed: int = 0, instances: int = 20) -> List[dict]:
    """Run a compact set of operator checks and return one row per check.

    Each row has ``check``, ``value``, ``threshold`` and ``passed``.
    """
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, value, threshold, passed):
        rows.append({"check": name, "value": float(value), "threshold": float(threshold),
                     "passed": bool(passed)})

    unit = ident = alg = 0.0
    for _ in range(instances):
        n = int(rng.integers(8, 33))
        A = _random_hermitian(rng, n)
        for eps in (0.1, 1.0, 10.0):
            U = cayley(A, eps)
            unit = max(unit, np.abs(U.conj().T @ U - np.eye(n)).max())
            ident = max(ident, check_resolvent_identity(A, eps))
            V = random_admissible_contrast(rng, n, eps) - 1j * eps
            m1, m2 = cbs_operator_dense(A, np.diag(V), eps)
            alg = max(alg, np.abs(m1 - m2).max())
    add("cayley_unitarity", unit, 1e-12, unit <= 1e-12)
    add("resolvent_identity", ident, 1e-11, ident <= 1e-11)
    add("quadratic_form_agreement", alg, 1e-12, alg <= 1e-12)

    A = build_reference_operator(32, "laplacian_1d_periodic", k0=1.0, h=0.3)
    rho = fov = 0.0
    for _ in range(instances):
        V = random_admissible_contrast(rng, 32, 1.0) - 1j
        M, _ = cbs_operator_dense(A, np.diag(V), 1.0)
        rho = max(rho, spectral_radius(M))
        fov = max(fov, numerical_radius(M))
    add("admissible_spectral_radius", rho, 1.0, rho < 1)
    add("admissible_numerical_radius", fov, 1.0, fov < 1)
    M, _ = cbs_operator_dense(A, np.full(32, 2.0 - 1j), 1.0)
    bad = spectral_radius(M)
    add("inadmissible_spectral_radius", bad, 1.0, bad >= 1)

    n = 32
    x = np.arange(n) / n
    sys_ = build_acoustic_system(n, 1.0 + 0.3 * np.sin(2 * np.pi * x) + 0.05j,
                                 1.0 + 0.2 * np.cos(4 * np.pi * x) + 0.05j, omega=2.0)
    herm = np.abs(1j * sys_.A - (1j * sys_.A).conj().T).max()
    add("acoustic_self_adjoint", herm, 1e-12, herm <= 1e-12)
    f = rng.standard_normal(2 * n) + 0j
    psi, _ = acoustic_cbs_solve(sys_, f)
    res = np.linalg.norm((sys_.A + sys_.V) @ psi - f) / np.linalg.norm(f)
    add("acoustic_fixed_point_residual", res, 1e-8, res <= 1e-8)
    return rows
