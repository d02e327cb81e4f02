"""Right-hand sides of the shifted-temperature primitive equations.

The prognostic unknowns are the horizontal velocity ``v`` (cosine basis,
stress-free walls) and the shifted temperature ``T`` (sine basis, homogeneous
Dirichlet walls).  The vertical velocity and the baroclinic pressure are
diagnosed from them; the surface pressure is never formed, its gradient is
removed by the barotropic projection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .calculus import (
    COS,
    SIN,
    GridSpec,
    ScalarField3,
    VectorFieldH,
    d2dz2,
    ddz,
    div_h,
    grad_h,
    h_forward,
    h_inverse,
    inner_L2,
    lap_h,
    norm_L2,
    truncate,
    truncate_vector,
    vint_from_bottom,
    z_forward,
    z_inverse,
)

log = logging.getLogger(__name__)

Forcing = Callable[[float], "tuple[VectorFieldH, ScalarField3]"]


class ConfigurationError(ValueError):
    """Invalid model or stepper configuration."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters and term switches.

    ``advection``, ``buoyancy`` and ``freeze_velocity`` exist for controlled
    experiments; the defaults give the full model.  ``forcing`` is an optional
    time-dependent body force ``t -> (fv, fT)`` added to the explicit part,
    used for manufactured solutions.
    """

    R1: float
    R2: float
    R3: float
    f0: float = 0.0
    h: float = 1.0
    Q: ScalarField3 | None = None
    advection: bool = True
    buoyancy: bool = True
    freeze_velocity: bool = False
    forcing: Forcing | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("R1", "R2", "R3", "h"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"params.{name} must be > 0")
        if self.Q is not None:
            if not np.isclose(self.Q.grid.h, self.h):
                raise ConfigurationError("params.h differs from the heat source grid depth")
            object.__setattr__(self, "Q", _compatible_source(self.Q))

    def source(self, grid: GridSpec) -> ScalarField3:
        if self.Q is None:
            return ScalarField3.zeros(grid, SIN)
        return self.Q

    def check_grid(self, grid: GridSpec):
        if not np.isclose(grid.h, self.h):
            raise ConfigurationError(f"params.h = {self.h} but grid.h = {grid.h}")


def _compatible_source(Q: ScalarField3) -> ScalarField3:
    """Project a heat source onto the retained sine modes."""
    wall = max(np.abs(Q.values[..., 0]).max(), np.abs(Q.values[..., -1]).max())
    if Q.basis != SIN or wall > 0:
        if wall > 1e-12 * max(1.0, np.abs(Q.values).max()):
            log.warning("heat source does not vanish on the walls; "
                        "projecting it onto the sine basis")
    return truncate(Q, SIN)


@dataclass(frozen=True, eq=False)
class State:
    """Prognostic fields at time ``t``.

    ``history`` holds the previous explicit tendency for multistep schemes;
    it is bookkeeping for the integrator and not part of the physical state.
    """

    t: float
    v: VectorFieldH
    T: ScalarField3
    history: tuple | None = field(default=None, repr=False)

    @property
    def grid(self) -> GridSpec:
        return self.T.grid

    @cached_property
    def w(self) -> ScalarField3:
        return diagnose_w(self.v)

    @cached_property
    def p_baroclinic(self) -> ScalarField3:
        return diagnose_pressure(self.T)

    def replace(self, **kw) -> "State":
        args = dict(t=self.t, v=self.v, T=self.T, history=self.history)
        args.update(kw)
        return State(**args)


@dataclass(frozen=True, eq=False)
class Tendency:
    """Explicit and implicit parts of dv/dt and dT/dt (unprojected)."""

    dv_explicit: VectorFieldH
    dv_implicit: VectorFieldH
    dT_explicit: ScalarField3
    dT_implicit: ScalarField3

    def total(self) -> tuple[VectorFieldH, ScalarField3]:
        """Full right-hand side with the surface-pressure gradient removed."""
        dv = barotropic_project(self.dv_explicit + self.dv_implicit)
        return dv, self.dT_explicit + self.dT_implicit


def make_state(v: VectorFieldH, T: ScalarField3, t: float = 0.0) -> State:
    """Build an admissible state: cosine/sine projection plus the constraint."""
    v = barotropic_project(truncate_vector(v, COS))
    return State(t=float(t), v=v, T=truncate(T, SIN))


def shift_temperature(T_phys: ScalarField3) -> ScalarField3:
    """Forward shift T = T_phys + z/h, mapping the wall data (0, 1) to (0, 0)."""
    grid = T_phys.grid
    return ScalarField3(grid, T_phys.values + grid.z / grid.h, SIN)


def reconstruct_physical_T(T: ScalarField3, h: float | None = None) -> ScalarField3:
    """Physical temperature T - z/h (0 on the top wall, 1 on the bottom)."""
    grid = T.grid
    h = grid.h if h is None else h
    return ScalarField3(grid, T.values - grid.z / h, None)


def diagnose_w(v: VectorFieldH) -> ScalarField3:
    """w = -int_{-h}^z div_h v."""
    return -vint_from_bottom(div_h(v))


def diagnose_pressure(T: ScalarField3) -> ScalarField3:
    """Baroclinic pressure p - p_s = -int_{-h}^z T."""
    return -vint_from_bottom(T)


def barotropic_project(dv: VectorFieldH) -> VectorFieldH:
    """Remove the gradient part of the vertical average of ``dv``.

    The vertical mean is the m = 0 cosine amplitude, so the projection only
    touches that slab: a 2-D Leray projection with a zero-mean gauge.
    """
    grid = dv.grid
    a1 = z_forward(dv.u1.values, COS)
    a2 = z_forward(dv.u2.values, COS)
    m1 = h_forward(a1[..., 0])
    m2 = h_forward(a2[..., 0])
    k2 = grid.k2
    safe = np.where(k2 > 0, k2, 1.0)
    proj = (grid.kx * m1 + grid.ky * m2) / safe
    proj = np.where(k2 > 0, proj, 0.0)
    a1[..., 0] -= h_inverse(grid.kx * proj, grid)
    a2[..., 0] -= h_inverse(grid.ky * proj, grid)
    return VectorFieldH(
        ScalarField3(grid, z_inverse(a1, COS), COS),
        ScalarField3(grid, z_inverse(a2, COS), COS),
    )


def advection_v(v: VectorFieldH, w: ScalarField3) -> VectorFieldH:
    """(v . grad_H) v + w dv/dz, pointwise and unprojected."""
    vz = ddz(v)
    out = []
    for comp, comp_z in zip(v.components, vz.components):
        g = grad_h(comp)
        vals = (v.u1.values * g.u1.values + v.u2.values * g.u2.values
                + w.values * comp_z.values)
        out.append(ScalarField3(v.grid, vals, COS))
    return VectorFieldH(*out)


def advection_T(v: VectorFieldH, w: ScalarField3, T: ScalarField3) -> ScalarField3:
    """v . grad_H T + w dT/dz, pointwise and unprojected."""
    g = grad_h(T)
    Tz = ddz(T)
    vals = (v.u1.values * g.u1.values + v.u2.values * g.u2.values
            + w.values * Tz.values)
    return ScalarField3(T.grid, vals, SIN)


def momentum_tendency(s: State, p: ModelParams) -> tuple[VectorFieldH, VectorFieldH]:
    """Explicit and implicit parts of dv/dt, without the surface pressure.

    explicit = -(v . grad_H) v - w v_z - f0 k x v + grad_H int_{-h}^z T
    implicit = (1/R1) lap_H v + (1/R2) v_zz
    """
    grid = s.grid
    if p.freeze_velocity:
        zero = VectorFieldH.zeros(grid, COS)
        return zero, zero
    v = s.v
    e1 = p.f0 * v.u2.values
    e2 = -p.f0 * v.u1.values
    if p.advection:
        adv = advection_v(v, s.w)
        e1 = e1 - adv.u1.values
        e2 = e2 - adv.u2.values
    if p.buoyancy:
        b = grad_h(vint_from_bottom(s.T))
        e1 = e1 + b.u1.values
        e2 = e2 + b.u2.values
    if p.forcing is not None:
        fv, _ = p.forcing(s.t)
        e1 = e1 + fv.u1.values
        e2 = e2 + fv.u2.values
    explicit = truncate_vector(
        VectorFieldH(ScalarField3(grid, e1, COS), ScalarField3(grid, e2, COS)), COS)
    implicit = (1.0 / p.R1) * lap_h(v) + (1.0 / p.R2) * d2dz2(v)
    return explicit, implicit


def temperature_tendency(s: State, p: ModelParams) -> tuple[ScalarField3, ScalarField3]:
    """Explicit and implicit parts of dT/dt.

    explicit = -v . grad_H T + (int_{-h}^z div_H v)(T_z + 1/h) + Q
             = -v . grad_H T - w (T_z + 1/h) + Q
    implicit = (1/R3) T_zz
    """
    grid = s.grid
    w = s.w
    vals = p.source(grid).values - w.values / grid.h
    if p.advection:
        vals = vals - advection_T(s.v, w, s.T).values
    if p.forcing is not None:
        _, fT = p.forcing(s.t)
        vals = vals + fT.values
    explicit = truncate(ScalarField3(grid, vals, SIN), SIN)
    implicit = (1.0 / p.R3) * d2dz2(s.T)
    return explicit, implicit


def tendency(s: State, p: ModelParams) -> Tendency:
    dv_e, dv_i = momentum_tendency(s, p)
    dT_e, dT_i = temperature_tendency(s, p)
    return Tendency(dv_e, dv_i, dT_e, dT_i)


def energy_budget(s: State, p: ModelParams, tend: Tendency | None = None) -> dict:
    """Terms of d/dt (1/2 ||v||^2 + 1/2 ||T||^2) from the assembled tendencies.

    ``rate`` is computed from the tendencies; the remaining entries are the
    individual dissipation, source and coupling terms evaluated directly.
    """
    tend = tendency(s, p) if tend is None else tend
    dv, dT = tend.total()
    grid = s.grid
    v, T = s.v, s.T
    rate = inner_L2(v, dv) + inner_L2(T, dT)
    gv = [grad_h(c) for c in v.components]
    grad_v2 = sum(norm_L2(g) ** 2 for g in gv)
    vz2 = norm_L2(ddz(v)) ** 2
    Tz2 = norm_L2(ddz(T)) ** 2
    Q = p.source(grid)
    terms = {
        "visc_h": 0.0 if p.freeze_velocity else -grad_v2 / p.R1,
        "visc_v": 0.0 if p.freeze_velocity else -vz2 / p.R2,
        "diff_T": -Tz2 / p.R3,
        "source": inner_L2(Q, T),
        "buoyancy": 0.0,
        "coupling": -inner_L2(s.w, T) / grid.h,
    }
    if p.buoyancy and not p.freeze_velocity:
        terms["buoyancy"] = inner_L2(grad_h(vint_from_bottom(T)), v)
    return {
        "rate": rate,
        "predicted": sum(terms.values()),
        "grad_v2": grad_v2,
        "vz2": vz2,
        "Tz2": Tz2,
        **terms,
    }
