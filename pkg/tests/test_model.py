import logging
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from pechannel.calculus import (
    COS,
    SIN,
    GridSpec,
    ScalarField2,
    ScalarField3,
    VectorFieldH,
    div_h,
    grad_h,
    inner_L2,
    norm_L2,
    norm_Lq,
    vertical_average,
    vint_from_bottom,
)
from pechannel.model import (
    ConfigurationError,
    ModelParams,
    State,
    advection_T,
    advection_v,
    barotropic_project,
    diagnose_pressure,
    diagnose_w,
    energy_budget,
    make_state,
    momentum_tendency,
    reconstruct_physical_T,
    shift_temperature,
    temperature_tendency,
)

from .conftest import random_field, random_state


def fn(grid, f, basis=COS):
    return ScalarField3.from_function(grid, f, basis)


def zero_state(grid):
    return State(0.0, VectorFieldH.zeros(grid), ScalarField3.zeros(grid, SIN))


class TestModelParams:
    @pytest.mark.parametrize("name", ["R1", "R2", "R3", "h"])
    def test_positivity(self, name):
        kw = dict(R1=1.0, R2=1.0, R3=1.0, h=1.0)
        kw[name] = 0.0
        with pytest.raises(ConfigurationError, match=f"params.{name} must be > 0"):
            ModelParams(**kw)

    def test_incompatible_source_is_projected(self, grid16, caplog):
        Q = fn(grid16, lambda x, y, z: 1.0 + 0 * x * y * z, None)
        with caplog.at_level(logging.WARNING):
            p = ModelParams(1.0, 1.0, 1.0, Q=Q)
        assert "does not vanish" in caplog.text
        assert p.Q.basis == SIN and np.abs(p.Q.values[..., [0, -1]]).max() < 1e-14

    def test_grid_depth_mismatch(self, grid16):
        with pytest.raises(ConfigurationError):
            ModelParams(1.0, 1.0, 1.0, h=2.0).check_grid(grid16)


class TestDiagnostics:
    def test_w_of_level_constant_velocity(self, grid16):
        v = VectorFieldH(fn(grid16, lambda x, y, z: np.cos(np.pi * z) + 0 * x * y),
                         fn(grid16, lambda x, y, z: 2 + np.cos(2 * np.pi * z) + 0 * x * y))
        assert norm_Lq(diagnose_w(v), math.inf) < 1e-13

    def test_w_of_shear(self, grid16):
        v = VectorFieldH(fn(grid16, lambda x, y, z: np.sin(2 * np.pi * y) + 0 * x * z),
                         ScalarField3.zeros(grid16))
        assert norm_Lq(diagnose_w(v), math.inf) < 1e-12

    def test_w_against_quadrature(self):
        grid = GridSpec(16, 16, 17, 0.7)
        h = grid.h
        v = VectorFieldH(fn(grid, lambda x, y, z: np.sin(2 * np.pi * x) * np.cos(np.pi * z / h) + 0 * y),
                         ScalarField3.zeros(grid))
        w = diagnose_w(v)
        # w = -int_{-h}^z 2 pi cos(2 pi x) cos(pi xi / h) dxi by Simpson on a fine grid
        prof = np.array([simpson(np.cos(np.pi * np.linspace(-h, zk, 4001) / h),
                                 x=np.linspace(-h, zk, 4001)) for zk in grid.z])
        oracle = -2 * np.pi * np.cos(2 * np.pi * grid.x)[:, None, None] * prof[None, None, :]
        assert np.abs(w.values - oracle).max() <= 1e-8
        assert np.abs(w.values[..., 0]).max() == 0.0

    def test_w_vanishes_on_top_iff_constraint(self, grid16):
        s = random_state(grid16, 3)
        assert np.abs(s.w.values[..., -1]).max() < 1e-12
        raw = VectorFieldH(random_field(grid16, COS, 1), random_field(grid16, COS, 2))
        assert np.abs(diagnose_w(raw).values[..., -1]).max() > 1e-3

    def test_pressure_of_zero(self, grid16):
        assert norm_L2(diagnose_pressure(ScalarField3.zeros(grid16, SIN))) == 0.0

    def test_pressure_of_constant(self, grid16):
        T = fn(grid16, lambda x, y, z: 2.5 + 0 * x * y * z, None)
        want = np.broadcast_to(-2.5 * (grid16.z + grid16.h), grid16.shape)
        np.testing.assert_allclose(diagnose_pressure(T).values, want, atol=1e-14)

    def test_pressure_gradient_commutes(self, grid32):
        T = random_field(grid32, SIN, 4)
        lhs = grad_h(diagnose_pressure(T))
        rhs = -vint_from_bottom(grad_h(T))
        assert norm_L2(lhs - rhs) <= 1e-10 * norm_L2(lhs)


class TestProjection:
    def test_divergence_free_unchanged(self, grid32):
        s = random_state(grid32, 2)
        out = barotropic_project(s.v)
        assert norm_L2(out - s.v) <= 1e-12 * norm_L2(s.v)

    def test_gradient_annihilated(self, grid32):
        x, y = grid32.mesh2
        phi = ScalarField2(grid32, np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y) + np.cos(2 * np.pi * y))
        gx, gy = grad_h(phi)
        out = barotropic_project(VectorFieldH(gx.lift(), gy.lift()))
        assert norm_L2(out) <= 1e-12 * norm_L2((gx, gy))

    def test_idempotent(self, grid32):
        dv = VectorFieldH(random_field(grid32, COS, 5), random_field(grid32, COS, 6))
        once = barotropic_project(dv)
        twice = barotropic_project(once)
        assert norm_L2(twice - once) <= 1e-12 * norm_L2(once)
        assert norm_Lq(div_h(vertical_average(once)), math.inf) <= 1e-12 * norm_Lq(dv, math.inf)

    def test_self_adjoint(self, grid32):
        a = VectorFieldH(random_field(grid32, COS, 7), random_field(grid32, COS, 8))
        b = VectorFieldH(random_field(grid32, COS, 9), random_field(grid32, COS, 10))
        lhs = inner_L2(barotropic_project(a), b)
        rhs = inner_L2(a, barotropic_project(b))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_baroclinic_part_untouched(self, grid32):
        dv = VectorFieldH(random_field(grid32, COS, 11), random_field(grid32, COS, 12))
        from pechannel.calculus import fluctuation
        diff = fluctuation(barotropic_project(dv)) - fluctuation(dv)
        assert norm_L2(diff) <= 1e-12 * norm_L2(dv)


class TestTemperatureShift:
    def test_zero_gives_linear_profile(self, grid16):
        Tp = reconstruct_physical_T(ScalarField3.zeros(grid16, SIN), 1.0)
        assert Tp.basis is None
        assert Tp.values[0, 0, -1] == 0.0 and Tp.values[0, 0, 0] == 1.0

    def test_mid_depth(self):
        grid = GridSpec(4, 4, 3, 1.0)
        Tp = reconstruct_physical_T(ScalarField3.zeros(grid, SIN), 1.0)
        assert grid.z[1] == -0.5 and Tp.values[0, 0, 1] == 0.5

    def test_round_trip(self, grid16):
        T = random_field(grid16, SIN, 3)
        back = shift_temperature(reconstruct_physical_T(T))
        assert np.abs(back.values - T.values).max() <= 1e-14


class TestTendencies:
    def test_zero_state(self, grid16, params):
        s = zero_state(grid16)
        (ve, vi), (te, ti) = momentum_tendency(s, params), temperature_tendency(s, params)
        for f in (ve, vi, te, ti):
            assert norm_L2(f) == 0.0

    def test_buoyancy_only(self):
        grid = GridSpec(16, 16, 17, 1.0)
        h = grid.h

        def T(x, y, z):
            return np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y) * np.sin(2 * np.pi * (z + h) / h)

        s = State(0.0, VectorFieldH.zeros(grid), fn(grid, T, SIN))
        p = ModelParams(2.0, 3.0, 1.0, f0=0.7)
        ve, _ = momentum_tendency(s, p)
        # int_{-h}^z sin(2 pi (xi + h)/h) dxi = (h / 2 pi)(1 - cos(2 pi (z + h)/h))
        x, y, z = grid.mesh
        F = (h / (2 * np.pi)) * (1 - np.cos(2 * np.pi * (z + h) / h))
        want1 = -2 * np.pi * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y) * F
        want2 = -2 * np.pi * np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y) * F
        assert np.abs(ve.u1.values - want1).max() <= 1e-8
        assert np.abs(ve.u2.values - want2).max() <= 1e-8

    def test_coriolis_orthogonal(self, grid32):
        s = random_state(grid32, 4)
        p = ModelParams(1.0, 1.0, 1.0, f0=3.0, advection=False, buoyancy=False)
        ve, _ = momentum_tendency(s, p)
        assert abs(inner_L2(ve, s.v)) <= 1e-12 * 3.0 * norm_L2(s.v) ** 2

    def test_diffusion_and_source_only_when_at_rest(self, grid16):
        Q = random_field(grid16, SIN, 5)
        T = fn(grid16, lambda x, y, z: np.sin(2 * np.pi * (z + 1)) + 0 * x * y, SIN)
        s = State(0.0, VectorFieldH.zeros(grid16), T)
        p = ModelParams(1.0, 1.0, 0.5, Q=Q)
        te, ti = temperature_tendency(s, p)
        assert norm_L2(te - p.Q) <= 1e-14
        np.testing.assert_allclose(ti.values, -(2 * np.pi) ** 2 / 0.5 * T.values, atol=1e-10)

    def test_temperature_tendency_against_symbolic_oracle(self):
        grid = GridSpec(16, 16, 17, 1.0)
        x, y, z = sp.symbols("x y z", real=True)
        h = 1
        v1 = sp.sin(2 * sp.pi * x) * sp.cos(sp.pi * (z + h)) + sp.Rational(1, 3) * sp.cos(2 * sp.pi * y)
        v2 = sp.cos(2 * sp.pi * y) * sp.cos(sp.pi * (z + h)) * sp.sin(2 * sp.pi * x)
        T = sp.cos(2 * sp.pi * x) * sp.sin(sp.pi * (z + h)) + sp.sin(2 * sp.pi * y) * sp.sin(2 * sp.pi * (z + h))
        xi = sp.Symbol("xi", real=True)
        div = sp.diff(v1, x) + sp.diff(v2, y)
        w = -sp.integrate(div.subs(z, xi), (xi, -h, z))
        rhs = -(v1 * sp.diff(T, x) + v2 * sp.diff(T, y)) - w * (sp.diff(T, z) + sp.Rational(1, h))
        oracle = sp.lambdify((x, y, z), rhs, "numpy")
        X, Y, Z = grid.mesh
        lam = {k: sp.lambdify((x, y, z), e, "numpy") for k, e in (("v1", v1), ("v2", v2), ("T", T))}
        v = VectorFieldH(fn(grid, lam["v1"]), fn(grid, lam["v2"]))
        s = State(0.0, v, fn(grid, lam["T"], SIN))
        te, _ = temperature_tendency(s, ModelParams(1.0, 1.0, 1.0))
        want = np.broadcast_to(oracle(X, Y, Z), grid.shape)
        assert np.abs(te.values - want).max() <= 1e-8 * np.abs(want).max()

    def test_rest_state_with_divergent_velocity_heats(self, grid16):
        # a divergent baroclinic velocity activates the 1/h source even when T = 0
        v = VectorFieldH(fn(grid16, lambda x, y, z: np.sin(2 * np.pi * x) * np.cos(np.pi * (z + 1)) + 0 * y),
                         ScalarField3.zeros(grid16))
        s = State(0.0, v, ScalarField3.zeros(grid16, SIN))
        te, _ = temperature_tendency(s, ModelParams(1.0, 1.0, 1.0))
        assert norm_L2(te - (-1.0 / grid16.h) * s.w) <= 1e-12


class TestConservationIdentities:
    def test_temperature_advection_skew(self, grid32):
        s = random_state(grid32, 6)
        adv = advection_T(s.v, s.w, s.T)
        assert abs(inner_L2(adv, s.T)) <= 1e-9 * norm_L2(adv) * norm_L2(s.T)

    def test_velocity_advection_skew(self, grid32):
        s = random_state(grid32, 7)
        adv = advection_v(s.v, s.w)
        assert abs(inner_L2(adv, s.v)) <= 1e-9 * norm_L2(adv) * norm_L2(s.v)

    def test_surface_pressure_orthogonal(self, grid32):
        s = random_state(grid32, 8)
        x, y = grid32.mesh2
        ps = ScalarField2(grid32, np.cos(2 * np.pi * x) * np.sin(6 * np.pi * y))
        gx, gy = grad_h(ps)
        val = inner_L2(VectorFieldH(gx.lift(), gy.lift()), s.v)
        assert abs(val) <= 1e-10 * norm_L2((gx, gy)) * norm_L2(s.v)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_energy_budget_term_by_term(self, grid32, seed):
        s = random_state(grid32, seed)
        Q = random_field(grid32, SIN, 40 + seed)
        p = ModelParams(3.0, 2.0, 0.5, f0=1.5, Q=Q)
        b = energy_budget(s, p)
        assert abs(b["rate"] - b["predicted"]) <= 1e-7 * abs(b["visc_h"] + b["visc_v"] + b["diff_T"])


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), amp=st.floats(0.01, 10.0))
def test_make_state_satisfies_constraint(seed, amp):
    grid = GridSpec(8, 8, 9, 1.0)
    s = random_state(grid, seed, amp_v=amp)
    scale = norm_Lq(s.v, math.inf)
    assert norm_Lq(div_h(vertical_average(s.v)), math.inf) <= 1e-12 * max(scale, 1e-300) * 8
    assert s.T.basis == SIN and s.v.basis == COS


def test_make_state_projects(grid16):
    raw = VectorFieldH(random_field(grid16, COS, 1), random_field(grid16, COS, 2))
    s = make_state(raw, random_field(grid16, SIN, 3))
    assert norm_Lq(div_h(vertical_average(s.v)), math.inf) < 1e-12
