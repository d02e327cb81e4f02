"""Named initial conditions, heat sources and perturbations."""

from __future__ import annotations

import numpy as np

from .calculus import COS, SIN, GridSpec, ScalarField3, VectorFieldH, from_spectral, norm_Lq
from .model import ConfigurationError, State, make_state


def _zc(grid: GridSpec, m: int) -> np.ndarray:
    return np.cos(m * np.pi * (grid.z + grid.h) / grid.h)


def _zs(grid: GridSpec, m: int) -> np.ndarray:
    return np.sin(m * np.pi * (grid.z + grid.h) / grid.h)


def taylor_mode(grid: GridSpec, amp_v: float, amp_T: float, mx: int = 1, my: int = 1,
                mz: int = 1) -> State:
    """Cellular velocity times cos(mz pi (z+h)/h) and temperature times sin(...).

    v = A (cos(2 pi mx x) sin(2 pi my y), -sin(2 pi mx x) cos(2 pi my y)) Z_c(z)
    T = A_T cos(2 pi mx x) cos(2 pi my y) Z_s(z)
    """
    x, y, _ = grid.mesh
    cx, sx = np.cos(2 * np.pi * mx * x), np.sin(2 * np.pi * mx * x)
    cy, sy = np.cos(2 * np.pi * my * y), np.sin(2 * np.pi * my * y)
    zc, zs = _zc(grid, mz), _zs(grid, max(mz, 1))
    v = VectorFieldH(ScalarField3(grid, amp_v * cx * sy * zc, COS),
                     ScalarField3(grid, -amp_v * sx * cy * zc, COS))
    T = ScalarField3(grid, amp_T * cx * cy * zs, SIN)
    return make_state(v, T)


def _random_field(grid: GridSpec, rng: np.random.Generator, band_limit: int, basis: str,
                  amplitude: float) -> ScalarField3:
    shape = grid.spectral_shape
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    kx, ky, m = grid.kx_int[:, :, None], grid.ky_int[:, :, None], grid.m[None, None, :]
    kk = np.sqrt(kx**2 + ky**2 + m**2)
    keep = (np.abs(kx) <= band_limit) & (np.abs(ky) <= band_limit) & (m <= band_limit)
    coef = np.where(keep & grid.mask, coef / (1.0 + kk) ** 2, 0.0)
    if basis == SIN:
        coef[..., 0] = 0.0
    f = from_spectral(grid, coef, basis)
    peak = norm_Lq(f, np.inf)
    return f * (amplitude / peak) if peak > 0 else f


def random_state(grid: GridSpec, amp_v: float, amp_T: float, seed: int,
                 band_limit: int = 3) -> State:
    """Band-limited random state scaled to the given sup-norm amplitudes."""
    rng = np.random.default_rng(seed)
    v = VectorFieldH(_random_field(grid, rng, band_limit, COS, amp_v),
                     _random_field(grid, rng, band_limit, COS, amp_v))
    T = _random_field(grid, rng, band_limit, SIN, amp_T)
    return make_state(v, T)


def mode_source(grid: GridSpec, amp: float, mx: int = 1, my: int = 0, mz: int = 1) -> ScalarField3:
    """Q = A cos(2 pi mx x) cos(2 pi my y) sin(mz pi (z+h)/h)."""
    x, y, _ = grid.mesh
    vals = amp * np.cos(2 * np.pi * mx * x) * np.cos(2 * np.pi * my * y) * _zs(grid, mz)
    return ScalarField3(grid, vals, SIN)


def perturb(s: State, spec: str) -> State:
    """Apply ``field:amp[:mx,my,mz]`` with field in {v1, v2, T}.

    The added mode is cos(2 pi mx x) cos(2 pi my y) times the field's vertical
    basis function (default mode 1,1,1).  The result is re-projected; a zero
    amplitude returns ``s`` itself so identical twins stay bitwise identical.
    """
    parts = spec.split(":")
    if len(parts) not in (2, 3) or parts[0] not in ("v1", "v2", "T"):
        raise ConfigurationError(f"bad perturbation spec {spec!r}; expected field:amp[:mx,my,mz]")
    try:
        amp = float(parts[1])
        modes = [int(m) for m in parts[2].split(",")] if len(parts) == 3 else [1, 1, 1]
    except ValueError:
        raise ConfigurationError(f"bad perturbation spec {spec!r}") from None
    if len(modes) != 3:
        raise ConfigurationError(f"bad perturbation modes in {spec!r}")
    if amp == 0:
        return s
    grid = s.grid
    mx, my, mz = modes
    x, y, _ = grid.mesh
    hor = np.cos(2 * np.pi * mx * x) * np.cos(2 * np.pi * my * y)
    v1, v2, T = s.v.u1, s.v.u2, s.T
    if parts[0] == "T":
        if mz < 1:
            raise ConfigurationError("temperature perturbations need mz >= 1")
        T = T + ScalarField3(grid, amp * hor * _zs(grid, mz), SIN)
    else:
        bump = ScalarField3(grid, amp * hor * _zc(grid, mz), COS)
        if parts[0] == "v1":
            v1 = v1 + bump
        else:
            v2 = v2 + bump
    return make_state(VectorFieldH(v1, v2), T, s.t)
