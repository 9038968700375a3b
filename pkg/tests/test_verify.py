import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbs_helmholtz.errors import InvalidModelError, InvalidParameterError, PreconditionError
from cbs_helmholtz.verify import (acoustic_cbs_solve, build_acoustic_system, build_reference_operator, cayley,
                                  cbs_operator_dense, check_admissibility, check_resolvent_identity,
                                  local_inequality, numerical_radius, numerical_range_samples,
                                  random_admissible_contrast, run_report, spectral_radius)


def _rand_sym(rng, n):
    X = rng.standard_normal((n, n))
    return (X + X.T) / 2


def test_reference_operator_1d_spectrum():
    k0, h = 1.3, 0.5
    A = build_reference_operator(4, k0=k0, h=h)
    j = np.arange(4)
    expected = k0 ** 2 - (2 / h ** 2) * (1 - np.cos(2 * np.pi * j / 4))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(A)), np.sort(expected), atol=1e-13)
    np.testing.assert_array_equal(A, A.T)


def test_reference_operator_2d_kronecker_sum():
    k0 = 0.8
    A1 = build_reference_operator(4, k0=k0)
    A2 = build_reference_operator(4, "laplacian_2d_periodic", k0=k0)
    np.testing.assert_array_equal(A2, A2.T)
    l1 = np.linalg.eigvalsh(A1) - k0 ** 2
    expected = (l1[:, None] + l1[None, :]).ravel() + k0 ** 2
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(A2)), np.sort(expected), atol=1e-12)
    with pytest.raises(InvalidParameterError):
        build_reference_operator(3)
    with pytest.raises(InvalidParameterError):
        build_reference_operator(8, "laplacian_3d")


def test_cayley_scalar_cases():
    np.testing.assert_allclose(cayley(np.zeros((4, 4)), 2.0), -np.eye(4), atol=1e-15)
    lam, eps = 0.7, 0.3
    np.testing.assert_allclose(cayley(lam * np.eye(3), eps), (lam - 1j * eps) / (lam + 1j * eps) * np.eye(3),
                               atol=1e-15)


def test_cayley_unitary_random():
    rng = np.random.default_rng(0)
    A = _rand_sym(rng, 8)
    U = cayley(A, 1.0)
    assert np.abs(np.abs(np.linalg.eigvals(U)) - 1).max() <= 1e-12
    assert np.abs(U.conj().T @ U - np.eye(8)).max() <= 1e-12


def test_cayley_preconditions():
    with pytest.raises(PreconditionError):
        cayley(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)
    with pytest.raises(InvalidParameterError):
        cayley(np.eye(2), 0.0)


def test_resolvent_identity():
    assert check_resolvent_identity(np.zeros((5, 5)), 1.0) <= 1e-15
    A = _rand_sym(np.random.default_rng(1), 8)
    assert check_resolvent_identity(A, 1.0) <= 1e-12
    assert check_resolvent_identity(build_reference_operator(16), 0.5) <= 1e-11


def test_quadratic_form_special_cases():
    rng = np.random.default_rng(2)
    A = _rand_sym(rng, 6)
    eps = 0.9
    U = cayley(A, eps)
    m1, m2 = cbs_operator_dense(A, np.diag(np.full(6, -1j * eps)), eps)
    # with G = -(A + i eps)^-1 the reference medium gives (I - U)/2
    np.testing.assert_allclose(m1, (np.eye(6) - U) / 2, atol=1e-14)
    np.testing.assert_allclose(m2, (np.eye(6) - U) / 2, atol=1e-14)
    m1, m2 = cbs_operator_dense(A, np.zeros((6, 6)), eps)
    np.testing.assert_allclose(m1, np.eye(6), atol=0)
    np.testing.assert_allclose(m2, np.eye(6), atol=1e-15)
    with pytest.raises(PreconditionError):
        cbs_operator_dense(A, np.ones((6, 6)), eps)


def test_quadratic_form_random_admissible():
    rng = np.random.default_rng(3)
    A = _rand_sym(rng, 12)
    for eps in (0.1, 1.0, 10.0):
        v = random_admissible_contrast(rng, 12, eps) - 1j * eps
        m1, m2 = cbs_operator_dense(A, v, eps)
        assert np.abs(m1 - m2).max() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_vuv_norm_bound(seed):
    rng = np.random.default_rng(seed)
    n = 10
    U = cayley(_rand_sym(rng, n), rng.uniform(0.1, 10))
    d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    vuv = d[:, None] * U * d[None, :]
    assert np.linalg.norm(vuv, 2) <= np.abs(d).max() ** 2 * (1 + 1e-12)


def test_numerical_range_scaled_identity():
    assert numerical_range_samples(0.5 * np.eye(5), 200, rng=0) == pytest.approx(0.5, abs=1e-15)
    assert numerical_radius(0.5 * np.eye(5)) == pytest.approx(0.5, abs=1e-14)


def test_numerical_radius_known_values():
    assert numerical_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(0.5, abs=1e-12)
    d = np.diag([0.3, -0.9j, 0.5 + 0.5j])
    assert numerical_radius(d) == pytest.approx(0.9, abs=1e-12)
    rng = np.random.default_rng(4)
    M = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    assert numerical_range_samples(M, 500, rng=1) <= numerical_radius(M) * (1 + 1e-12)
    assert spectral_radius(M) <= numerical_radius(M) * (1 + 1e-12)


def test_spectral_radius():
    assert spectral_radius(np.diag([0.3, -0.9j])) == pytest.approx(0.9)


def test_marginal_reference_medium_has_unit_radius():
    # k0^2 = 2/h^2 (1 - cos(2 pi/8)) puts an eigenvalue of A at 0
    n, h, eps = 8, 1.0, 0.5
    k0 = np.sqrt(2 * (1 - np.cos(2 * np.pi / n)))
    A = build_reference_operator(n, k0=k0, h=h)
    assert np.abs(np.linalg.eigvalsh(A)).min() < 1e-12
    M, _ = cbs_operator_dense(A, np.full(n, -1j * eps), eps)
    assert spectral_radius(M) == pytest.approx(1.0, abs=1e-12)


def test_uniform_absorption_contracts():
    rng = np.random.default_rng(5)
    n, eps = 32, 1.0
    A = build_reference_operator(n, k0=1.0, h=0.3)
    delta = random_admissible_contrast(rng, n, eps, min_absorption=0.1)
    assert delta.imag.min() >= 0.1 * eps
    M, _ = cbs_operator_dense(A, delta - 1j * eps, eps)
    rho = spectral_radius(M)
    assert rho <= 1 - 1e-3
    assert numerical_radius(M) < 1
    assert numerical_range_samples(M, 500, rng=0) < 1


def test_inadmissible_potential_expands():
    n, eps = 32, 1.0
    A = build_reference_operator(n, k0=1.0, h=0.3)
    M, _ = cbs_operator_dense(A, np.full(n, 2 * eps - 1j * eps), eps)
    assert spectral_radius(M) >= 1
    assert numerical_radius(M) >= 1


def test_admissibility_boundary_cases():
    eps = 2.0
    rep = check_admissibility(np.array([-1j * eps]), eps)
    assert rep.admissible and rep.margin == pytest.approx(0.0, abs=1e-15)
    assert local_inequality(-1j * eps, eps) == pytest.approx(0.0, abs=1e-12)
    rep = check_admissibility(np.diag([0.0 + 0j, -1j * eps]), eps)
    assert rep and rep.local_inequality_holds
    assert local_inequality(0.0, eps) == pytest.approx(0.0, abs=1e-12)
    rep = check_admissibility(np.array([-2j * eps]), eps)
    assert not rep.admissible
    assert rep.worst_eigenvalue == pytest.approx(-1j * eps)
    assert not check_admissibility(np.array([1.5 * eps - 1j * eps]), eps)
    with pytest.raises(PreconditionError):
        check_admissibility(np.ones((2, 2)), eps)


def test_local_inequality_holds_on_admissible_half_disk():
    rng = np.random.default_rng(6)
    eps = 1.7
    r = eps * np.sqrt(rng.uniform(0, 1, 10_000))
    delta = r * np.exp(1j * rng.uniform(0, np.pi, 10_000))
    assert np.all(local_inequality(delta - 1j * eps, eps) <= 1e-12 * eps ** 2)
    assert check_admissibility(delta - 1j * eps, eps).local_inequality_holds


def test_local_inequality_is_not_implied_for_potential_itself():
    # the half-disk conditions applied to V rather than V + i eps are too weak
    eps = 1.0
    assert local_inequality(0.5j * eps, eps) > 0


def test_acoustic_reference_medium_has_no_potential():
    sys_ = build_acoustic_system(8, np.full(8, 1.5), np.full(8, 0.7), omega=2.0, rho0=1.5, kappa0=0.7)
    np.testing.assert_array_equal(sys_.V, 0)


@pytest.mark.parametrize("dim", [1, 2])
def test_acoustic_structure(dim):
    n = 6
    shape = (n,) if dim == 1 else (n, n)
    rng = np.random.default_rng(7)
    rho = 1 + 0.3 * rng.uniform(size=shape) + 0.02j
    kappa = 1 + 0.3 * rng.uniform(size=shape)
    sys_ = build_acoustic_system(n, rho, kappa, omega=1.5, dim=dim)
    H = 1j * sys_.A
    assert np.abs(H - H.conj().T).max() <= 1e-12
    V = sys_.V
    np.testing.assert_array_equal(V - np.diag(np.diag(V)), 0)
    assert sys_.n_velocity == dim * n ** dim and sys_.n_pressure == n ** dim
    np.testing.assert_allclose(np.diag(V)[:n ** dim], -1.5j * (rho - 1).ravel())


def test_acoustic_validation():
    with pytest.raises(InvalidModelError):
        build_acoustic_system(8, np.full(8, -1.0), np.ones(8))
    with pytest.raises(InvalidModelError):
        build_acoustic_system(8, np.ones(8) - 0.1j, np.ones(8))
    with pytest.raises(InvalidModelError):
        build_acoustic_system(8, np.ones(7), np.ones(8))
    with pytest.raises(InvalidParameterError):
        build_acoustic_system(8, np.ones(8), np.ones(8), dim=3)


def test_acoustic_cbs_matches_direct_solve():
    n = 64
    x = np.arange(n) / n
    rho = 1 + 0.5 * np.sin(2 * np.pi * x) ** 2 + 0.05j
    kappa = 1 + 0.4 * (x > 0.5) + 0.05j
    sys_ = build_acoustic_system(n, rho, kappa, omega=3.0, h=1 / n)
    f = np.random.default_rng(8).standard_normal(2 * n) + 0j
    psi, res = acoustic_cbs_solve(sys_, f)
    assert res[-1] <= 1e-12
    direct = np.linalg.solve(sys_.A + sys_.V, f)
    assert np.linalg.norm(psi - direct) <= 1e-8 * np.linalg.norm(direct)
    assert np.linalg.norm((sys_.A + sys_.V) @ psi - f) <= 1e-8 * np.linalg.norm(f)


def test_run_report_passes():
    rows = run_report(seed=1, instances=5)
    assert rows and all(r["passed"] for r in rows)
