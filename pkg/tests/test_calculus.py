import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from pechannel.calculus import (
    COS,
    SIN,
    GridSpec,
    IncompatibleFieldsError,
    ScalarField2,
    ScalarField3,
    VectorFieldH,
    curl_h,
    d2dz2,
    ddz,
    div_h,
    fluctuation,
    from_spectral,
    grad_h,
    inner_L2,
    inv_lap_h,
    lap_h,
    norm_Hm,
    norm_L2,
    norm_Lq,
    seminorm_H1,
    to_spectral,
    vertical_average,
    vint_from_bottom,
)

from .conftest import random_field


def fn(grid, f, basis=COS):
    return ScalarField3.from_function(grid, f, basis)


def smooth(x, y, z):
    """Band-limited test function (horizontal modes <= 2, vertical cos modes <= 3)."""
    return (0.3 + np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y)
            + 0.5 * np.cos(2 * np.pi * (x + y)) * np.cos(3 * np.pi * (z + 1))
            + 0.2 * np.cos(np.pi * (z + 1)))


class TestGridSpec:
    def test_levels_include_walls(self, grid16):
        assert grid16.z[0] == -1.0 and grid16.z[-1] == 0.0

    @pytest.mark.parametrize("kw", [dict(nx=5), dict(nx=2), dict(nz=2), dict(h=0.0)])
    def test_rejects_invalid(self, kw):
        args = dict(nx=8, ny=8, nz=5, h=1.0)
        args.update(kw)
        with pytest.raises(ValueError):
            GridSpec(**args)

    def test_trapezoid_weights_sum_to_depth(self):
        g = GridSpec(8, 8, 9, 2.5)
        assert g.zweights.sum() == pytest.approx(2.5, rel=1e-15)


class TestHorizontalOperators:
    def test_grad_of_constant(self, grid16):
        g = grad_h(fn(grid16, lambda x, y, z: 3.0 + 0 * x))
        assert np.abs(g.u1.values).max() < 1e-13 and np.abs(g.u2.values).max() < 1e-13

    def test_grad_single_mode(self, grid16):
        g = grad_h(fn(grid16, lambda x, y, z: np.sin(2 * np.pi * x) + 0 * z))
        x = grid16.mesh[0]
        np.testing.assert_allclose(g.u1.values, np.broadcast_to(2 * np.pi * np.cos(2 * np.pi * x),
                                                                grid16.shape), atol=1e-12)
        assert np.abs(g.u2.values).max() < 1e-12

    def test_grad_matches_finite_differences(self):
        # centered differences of the analytic function at 512 collocation points
        grid = GridSpec(16, 16, 9, 1.0, dealias=False)
        f = fn(grid, smooth)
        g = grad_h(f)
        rng = np.random.default_rng(3)
        idx = rng.integers(0, [16, 16, 9], size=(512, 3))
        x, y, z = grid.x[idx[:, 0]], grid.y[idx[:, 1]], grid.z[idx[:, 2]]
        d = 1e-5
        fdx = (smooth(x + d, y, z) - smooth(x - d, y, z)) / (2 * d)
        fdy = (smooth(x, y + d, z) - smooth(x, y - d, z)) / (2 * d)
        got = np.stack([g.u1.values[tuple(idx.T)], g.u2.values[tuple(idx.T)]])
        want = np.stack([fdx, fdy])
        assert np.abs(got - want).max() <= 1e-6 * np.abs(want).max()

    def test_div_curl_of_shear(self, grid16):
        x, y, _ = grid16.mesh
        u = VectorFieldH(fn(grid16, lambda x, y, z: np.sin(2 * np.pi * y) + 0 * x * z),
                         ScalarField3.zeros(grid16))
        assert norm_Lq(div_h(u), math.inf) < 1e-12
        want = np.broadcast_to(-2 * np.pi * np.cos(2 * np.pi * y), grid16.shape)
        np.testing.assert_allclose(curl_h(u).values, want, atol=1e-12)

    def test_laplacian_eigenfunction(self, grid16):
        f = fn(grid16, lambda x, y, z: np.cos(2 * np.pi * x) + 0 * y * z)
        np.testing.assert_allclose(lap_h(f).values, -4 * np.pi**2 * f.values, atol=1e-11)

    def test_curl_grad_vanishes(self, grid32):
        f = random_field(grid32, COS, 5)
        scale = norm_Lq(f, math.inf)
        assert norm_Lq(curl_h(grad_h(f)), math.inf) <= 1e-10 * scale

    def test_div_grad_is_laplacian(self, grid32):
        f = random_field(grid32, COS, 6)
        diff = div_h(grad_h(f)) - lap_h(f)
        assert norm_Lq(diff, math.inf) <= 1e-11 * norm_Lq(lap_h(f), math.inf)

    def test_inverse_laplacian(self, grid16):
        f = random_field(grid16, SIN, 7)
        f0 = ScalarField3(grid16, f.values - f.values.mean(axis=(0, 1)), SIN)
        back = lap_h(inv_lap_h(f0))
        assert norm_L2(back - f0) <= 1e-12 * norm_L2(f0)

    def test_two_dimensional_fields(self, grid16):
        x, y = grid16.mesh2
        f = ScalarField2(grid16, np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y))
        gx, gy = grad_h(f)
        assert norm_L2(div_h((gx, gy)) - lap_h(f)) < 1e-11
        assert norm_L2(f) == pytest.approx(0.5, rel=1e-14)

    def test_horizontal_integration_by_parts(self, grid32):
        u = VectorFieldH(random_field(grid32, COS, 1), random_field(grid32, COS, 2))
        f = random_field(grid32, COS, 3)
        lhs = inner_L2(div_h(u), f)
        rhs = -inner_L2(u, grad_h(f))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_spectral_convergence(self):
        def analytic(x, y, z):
            return np.exp(np.sin(2 * np.pi * x)) + 0 * y * z

        def deriv(x, y, z):
            return 2 * np.pi * np.cos(2 * np.pi * x) * analytic(x, y, z)

        errs = []
        for n in (8, 16, 32):
            g = GridSpec(n, 4, 3, 1.0, dealias=False)
            num = grad_h(fn(g, analytic)).u1.values
            errs.append(np.abs(num - fn(g, deriv).values).max())
        assert errs[0] / errs[1] >= 10
        assert errs[1] / errs[2] >= 10 or errs[2] < 1e-10


class TestVerticalOperators:
    def test_ddz_cos_mode(self, grid16):
        h = grid16.h
        f = fn(grid16, lambda x, y, z: np.cos(np.pi * z / h) + 0 * x * y)
        d = ddz(f)
        assert d.basis == SIN
        want = fn(grid16, lambda x, y, z: -(np.pi / h) * np.sin(np.pi * z / h) + 0 * x * y).values
        np.testing.assert_allclose(d.values, want, atol=1e-13)

    def test_ddz_constant(self, grid16):
        assert np.abs(ddz(fn(grid16, lambda x, y, z: 2.0 + 0 * x * y * z)).values).max() < 1e-13

    def test_ddz_flips_basis_twice(self, grid16):
        f = random_field(grid16, SIN, 1)
        assert ddz(f).basis == COS and ddz(ddz(f)).basis == SIN
        assert norm_L2(ddz(ddz(f)) - d2dz2(f)) <= 1e-10 * norm_L2(d2dz2(f))

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_d2dz2_sine_eigenvalues(self, m):
        grid = GridSpec(4, 4, 33, 1.0, dealias=False)
        h = grid.h
        mode = lambda z: np.sin(m * np.pi * (z + h) / h)  # noqa: E731
        f = fn(grid, lambda x, y, z: mode(z) + 0 * x * y, SIN)
        lam = -(m * np.pi / h) ** 2
        np.testing.assert_allclose(d2dz2(f).values, lam * f.values, atol=1e-10 * abs(lam))
        # second-difference oracle on a fine stencil
        d = 1e-4
        z = grid.z[1:-1]
        fd = (mode(z + d) - 2 * mode(z) + mode(z - d)) / d**2
        assert np.abs(d2dz2(f).values[0, 0, 1:-1] - fd).max() <= 1e-5 * abs(lam)

    def test_vint_of_one(self, grid16):
        F = vint_from_bottom(fn(grid16, lambda x, y, z: 1.0 + 0 * x * y * z))
        np.testing.assert_allclose(F.values, np.broadcast_to(grid16.z + 1.0, grid16.shape),
                                   atol=1e-14)

    def test_vint_of_cos_mode(self, grid16):
        h = grid16.h
        F = vint_from_bottom(fn(grid16, lambda x, y, z: np.cos(np.pi * z / h) + 0 * x * y))
        want = np.broadcast_to((h / np.pi) * np.sin(np.pi * grid16.z / h), grid16.shape)
        np.testing.assert_allclose(F.values, want, atol=1e-14)

    @pytest.mark.parametrize("basis", [COS, SIN])
    def test_vint_matches_simpson(self, basis):
        grid = GridSpec(4, 4, 17, 1.3, dealias=False)
        h = grid.h
        rng = np.random.default_rng(11)
        amps = rng.standard_normal(5)
        trig = np.cos if basis == COS else np.sin

        def prof(z):
            return sum(a * trig(m * np.pi * (z + h) / h) for m, a in enumerate(amps))

        f = fn(grid, lambda x, y, z: prof(z) + 0 * x * y, basis)
        F = vint_from_bottom(f).values[0, 0]
        oracle = np.array([simpson(prof(np.linspace(-h, zk, 2001)), x=np.linspace(-h, zk, 2001))
                           for zk in grid.z])
        assert F[0] == 0.0
        assert np.abs(F - oracle).max() <= 1e-8 * np.abs(oracle).max()

    def test_vint_top_is_depth_times_average(self, grid16):
        for basis in (COS, SIN):
            f = random_field(grid16, basis, 4)
            top = vint_from_bottom(f).values[..., -1]
            avg = vertical_average(f).values
            assert np.abs(top - grid16.h * avg).max() <= 1e-12 * np.abs(top).max()

    def test_average_and_fluctuation_of_constant(self, grid16):
        f = fn(grid16, lambda x, y, z: 3.0 + 0 * x * y * z)
        np.testing.assert_allclose(vertical_average(f).values, 3.0, rtol=1e-15)
        assert np.abs(fluctuation(f).values).max() < 1e-14

    def test_average_of_odd_mode(self, grid16):
        f = fn(grid16, lambda x, y, z: np.sin(2 * np.pi * x) * np.cos(np.pi * z) + 0 * y)
        assert np.abs(vertical_average(f).values).max() < 1e-15

    def test_fluctuation_has_zero_mean(self, grid16):
        f = random_field(grid16, COS, 9)
        assert np.abs(vertical_average(fluctuation(f)).values).max() <= 1e-12

    def test_vertical_integration_by_parts(self, grid32):
        f = random_field(grid32, SIN, 1)
        g = random_field(grid32, COS, 2)
        lhs = inner_L2(ddz(f), g) + inner_L2(f, ddz(g))
        assert abs(lhs) <= 1e-10 * abs(inner_L2(ddz(f), g))


class TestNormsAndTransforms:
    def test_unit_volume(self, grid16):
        assert norm_L2(fn(grid16, lambda x, y, z: 1.0 + 0 * x * y * z)) == pytest.approx(1.0,
                                                                                        rel=1e-15)

    def test_sine_norm(self, grid16):
        f = fn(grid16, lambda x, y, z: np.sin(2 * np.pi * x) + 0 * y * z)
        assert norm_L2(f) == pytest.approx(1 / math.sqrt(2), rel=1e-14)

    def test_inner_product_consistency(self, grid16):
        f = random_field(grid16, COS, 3)
        assert inner_L2(f, f) == pytest.approx(norm_L2(f) ** 2, rel=1e-12)

    def test_incompatible_grids(self, grid16, grid32):
        with pytest.raises(IncompatibleFieldsError):
            inner_L2(random_field(grid16), random_field(grid32))

    @pytest.mark.parametrize("basis", [COS, SIN])
    def test_round_trip(self, grid32, basis):
        f = random_field(grid32, basis, 8)
        back = from_spectral(grid32, to_spectral(f), basis)
        assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()

    def test_sine_fields_vanish_on_walls(self, grid16):
        f = random_field(grid16, SIN, 2)
        assert np.abs(f.values[..., 0]).max() == 0 and np.abs(f.values[..., -1]).max() < 1e-14

    def test_cosine_fields_have_flat_walls(self, grid16):
        d = ddz(random_field(grid16, COS, 2))
        assert np.abs(d.values[..., [0, -1]]).max() < 1e-13

    def test_h1_norm_single_mode(self):
        grid = GridSpec(8, 8, 9, 1.0)
        f = fn(grid, lambda x, y, z: np.sin(2 * np.pi * x) + 0 * y * z)
        assert seminorm_H1(f) == pytest.approx(2 * np.pi / math.sqrt(2), rel=1e-13)
        assert norm_Hm(f, 1) == pytest.approx(math.sqrt(0.5 + 2 * np.pi**2), rel=1e-13)

    def test_sup_norm_is_grid_max(self, grid16):
        f = random_field(grid16, COS, 1)
        assert norm_Lq(f, math.inf) == np.abs(f.values).max()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_operators_are_linear(seed, a, b):
    grid = GridSpec(8, 8, 9, 1.0)
    f, g = random_field(grid, COS, seed), random_field(grid, COS, seed + 1)
    combo = a * f + b * g
    for op in (lap_h, ddz, vint_from_bottom, lambda u: div_h(grad_h(u))):
        lhs = op(combo).values
        rhs = a * op(f).values + b * op(g).values
        assert np.abs(lhs - rhs).max() <= 1e-10 * (1 + np.abs(rhs).max())


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), h=st.floats(0.2, 5.0))
def test_vertical_ibp_property(seed, h):
    grid = GridSpec(8, 8, 13, h)
    f, g = random_field(grid, SIN, seed), random_field(grid, COS, seed + 7)
    lhs = inner_L2(ddz(f), g) + inner_L2(f, ddz(g))
    assert abs(lhs) <= 1e-10 * (norm_L2(ddz(f)) * norm_L2(g) + norm_L2(f) * norm_L2(ddz(g)))
