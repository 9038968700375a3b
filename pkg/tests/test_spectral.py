import itertools

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from cbs_helmholtz.errors import InvalidParameterError, ShapeError
from cbs_helmholtz.medium import Grid2D
from cbs_helmholtz.spectral import (PaddedGrid, apply_resolvent, build_kernel, default_padding, plan_padding,
                                    smooth_size, wavenumbers)


def _brute_smooth(n):
    best = None
    for a, b, c in itertools.product(range(12), range(8), range(6)):
        v = 2 ** a * 3 ** b * 5 ** c
        if v >= n and (best is None or v < best):
            best = v
    return best


@pytest.mark.parametrize("n", [1, 7, 97, 100, 121, 356, 511, 1000, 1201])
def test_smooth_size_matches_exhaustive_search(n):
    assert smooth_size(n) == _brute_smooth(n)


def test_plan_padding_examples():
    g = Grid2D(100, 100, 1.0, 1.0)
    p = plan_padding(g, 0)
    assert p.Nx >= 100 and p.Nx == _brute_smooth(100)
    p = plan_padding(g, 30)
    assert p.Nx >= 160 and p.pad_x >= 30
    g = Grid2D(250, 40, 1.0, 1.0)
    p = plan_padding(g, 53)
    assert p.Nx == _brute_smooth(356)
    assert p.pad_x >= 53 and p.Nx - 250 - p.pad_x >= 53
    assert p.pad_y >= 53
    np.testing.assert_array_equal(np.zeros(p.shape)[p.interior].shape, g.shape)


def test_plan_padding_validation():
    g = Grid2D(8, 8, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        plan_padding(g, -1)
    with pytest.raises(InvalidParameterError):
        PaddedGrid(g, 2, 2, 10, 12)


def test_default_padding():
    g = Grid2D(120, 120, 10.0, 10.0)
    p = default_padding(g, (10, 10), (100, 100))
    assert p.pad_x >= 10 + 25 and p.pad_y >= 35


def _kernel(n=64, d=10.0, k0=0.0314, eps=1e-4):
    return build_kernel(plan_padding(Grid2D(n, n, d, d), 0), k0, eps)


def test_kernel_values():
    k0, eps = 0.5, 0.01
    pg = PaddedGrid(Grid2D(64, 64, 1.0, 1.0), 0, 0, 64, 64)
    ker = build_kernel(pg, k0, eps)
    assert ker.ghat[0, 0] == pytest.approx(1 / (-k0 ** 2 - 1j * eps))
    ky, kx = wavenumbers(pg)
    assert kx[1] == pytest.approx(2 * np.pi / 64)
    # on-shell: choose k0 equal to a grid wavenumber
    ker = build_kernel(pg, kx[3], eps)
    assert ker.ghat[0, 3] == pytest.approx(1j / eps, rel=1e-12)
    # far off-shell
    ker = build_kernel(pg, kx[32] / 1e3, 1e-6)
    assert abs(ker.ghat[0, 32] * kx[32] ** 2 - 1) < 1e-4
    assert np.abs(ker.ghat).max() <= 1 / 1e-6
    with pytest.raises(InvalidParameterError):
        build_kernel(pg, k0, 0.0)
    with pytest.raises(ValueError):
        ker.ghat[0, 0] = 0


def test_kernel_symmetry():
    ker = _kernel(60)
    g = ker.ghat
    np.testing.assert_array_equal(g, np.roll(g[::-1, ::-1], (1, 1), axis=(0, 1)))


def test_resolvent_zero_and_shape():
    ker = _kernel(32)
    np.testing.assert_array_equal(apply_resolvent(ker, np.zeros((32, 32))), 0)
    with pytest.raises(ShapeError):
        apply_resolvent(ker, np.zeros((31, 32)))


def test_resolvent_linearity():
    rng = np.random.default_rng(1)
    ker = _kernel(40)
    u = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
    w = rng.standard_normal((40, 40))
    a, b = 2 - 1j, 0.3
    lhs = apply_resolvent(ker, a * u + b * w)
    rhs = a * apply_resolvent(ker, u) + b * apply_resolvent(ker, w)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(lhs)


def test_unit_kernel_round_trip():
    rng = np.random.default_rng(2)
    pg = plan_padding(Grid2D(30, 20, 1.0, 1.0), 7)
    ker = build_kernel(pg, 0.1, 1.0)
    ker = type(ker)(pg, 0.1, 1.0, np.ones(pg.shape, dtype=complex))
    u = rng.standard_normal((20, 30)) + 1j * rng.standard_normal((20, 30))
    np.testing.assert_allclose(apply_resolvent(ker, u), u, rtol=0, atol=1e-12 * np.abs(u).max())


def test_even_input_gives_even_output():
    n = 33
    ker = build_kernel(PaddedGrid(Grid2D(n, n, 1.0, 1.0), 0, 0, n, n), 0.4, 0.05)
    x = np.arange(n) - n // 2
    u = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / 20.0)
    # center the even input at index 0 for the periodic grid
    u = np.fft.ifftshift(u)
    out = apply_resolvent(ker, u)
    np.testing.assert_allclose(out, np.roll(out[::-1, ::-1], (1, 1), axis=(0, 1)), atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 10.0))
def test_resolvent_norm_bound(seed, eps):
    rng = np.random.default_rng(seed)
    ker = build_kernel(plan_padding(Grid2D(16, 16, 1.0, 1.0), 4), 1.0, eps)
    u = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    assert np.linalg.norm(apply_resolvent(ker, u)) <= np.linalg.norm(u) / eps * (1 + 1e-12)


def test_point_source_matches_damped_hankel():
    c0, f, d, n = 2000.0, 10.0, 20.0, 256
    k0 = 2 * np.pi * f / c0
    eps = 0.5 * k0 ** 2
    pg = PaddedGrid(Grid2D(n, n, d, d), 0, 0, n, n)
    ker = build_kernel(pg, k0, eps)
    s = np.zeros((n, n), dtype=complex)
    s[n // 2, n // 2] = 1 / d ** 2
    psi = apply_resolvent(ker, s)
    x = (np.arange(n) - n // 2) * d
    r = np.hypot(x[:, None], x[None, :])
    mask = r > 2 * d
    kt = np.sqrt(k0 ** 2 + 1j * eps)
    assert kt.imag > 0
    g = 0.25j * scipy.special.hankel1(0, kt * r[mask])
    assert np.linalg.norm(psi[mask] - g) / np.linalg.norm(g) <= 0.02
