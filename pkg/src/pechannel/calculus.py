"""Discrete fields and spectral operators on the channel M x (-h, 0).

Horizontally the domain is the unit torus M = (0, 1)^2, sampled on a uniform
grid and expanded in Fourier modes.  Vertically the nz levels include both
walls, z_k = -h + k h / (nz - 1), so a single point set supports the
half-period cosine expansion (DCT-I, Neumann walls) and the half-period sine
expansion (DST-I on the interior points, Dirichlet walls).

Vertical modal amplitudes are stored as the actual series coefficients:

    f(z) = sum_m a_m cos(m pi (z + h) / h)     (basis "cos", m = 0..N)
    f(z) = sum_m b_m sin(m pi (z + h) / h)     (basis "sin", m = 1..N-1)

with N = nz - 1; both use arrays of length nz so that derivatives are plain
elementwise multiplications.  Quadrature is the trapezoid rule in z and the
grid mean in x, y, which integrates every product of two resolved modes
exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft

COS = "cos"
SIN = "sin"
_BASES = (COS, SIN, None)


class IncompatibleFieldsError(ValueError):
    """Operands live on different grids or have mismatched shapes."""


@dataclass(frozen=True)
class GridSpec:
    """Resolution and geometry of the channel.

    ``nx`` and ``ny`` are even horizontal mode counts (>= 4), ``nz`` the
    number of vertical levels including both walls (>= 3) and ``h`` the
    depth.  ``dealias`` switches the 2/3-rule truncation of products on.
    """

    nx: int
    ny: int
    nz: int
    h: float = 1.0
    dealias: bool = True

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or n % 2:
                raise ValueError(f"grid.{name} must be an even integer >= 4, got {n}")
        if int(self.nz) != self.nz or self.nz < 3:
            raise ValueError(f"grid.nz must be an integer >= 3, got {self.nz}")
        if not self.h > 0:
            raise ValueError(f"grid.h must be > 0, got {self.h}")

    @property
    def N(self) -> int:
        """Number of vertical intervals."""
        return self.nz - 1

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny // 2 + 1, self.nz)

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny

    @property
    def dz(self) -> float:
        return self.h / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) / self.nx

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) / self.ny

    @cached_property
    def z(self) -> np.ndarray:
        return -self.h + self.h * np.arange(self.nz) / self.N

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable (x, y, z) coordinate arrays."""
        return (self.x[:, None, None], self.y[None, :, None], self.z[None, None, :])

    @cached_property
    def mesh2(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.x[:, None], self.y[None, :])

    @cached_property
    def kx_int(self) -> np.ndarray:
        return np.fft.fftfreq(self.nx, 1.0 / self.nx)[:, None]

    @cached_property
    def ky_int(self) -> np.ndarray:
        return np.fft.rfftfreq(self.ny, 1.0 / self.ny)[None, :]

    @cached_property
    def kx(self) -> np.ndarray:
        """Angular x-wavenumbers (nx, 1); the Nyquist row is zeroed."""
        k = 2 * np.pi * self.kx_int.copy()
        k[self.nx // 2] = 0.0
        return k

    @cached_property
    def ky(self) -> np.ndarray:
        """Angular y-wavenumbers (1, ny//2+1); the Nyquist column is zeroed."""
        k = 2 * np.pi * self.ky_int.copy()
        k[:, self.ny // 2] = 0.0
        return k

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def m(self) -> np.ndarray:
        return np.arange(self.nz)

    @cached_property
    def kz(self) -> np.ndarray:
        """Vertical wavenumbers m pi / h for m = 0..N."""
        return self.m * np.pi / self.h

    @cached_property
    def zweights(self) -> np.ndarray:
        """Trapezoid weights on the vertical levels; they sum to h."""
        w = np.full(self.nz, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return w

    @cached_property
    def hmask(self) -> np.ndarray:
        """Retained horizontal modes (nx, ny//2+1)."""
        ax = np.abs(self.kx_int)
        ay = np.abs(self.ky_int)
        if self.dealias:
            keep = (3 * ax < self.nx) & (3 * ay < self.ny)
        else:
            keep = (2 * ax < self.nx) & (2 * ay < self.ny)
        return keep

    @cached_property
    def zmask(self) -> np.ndarray:
        """Retained vertical modes (nz,)."""
        if self.dealias:
            return 3 * self.m < 2 * self.N
        return self.m < self.N

    @cached_property
    def mask(self) -> np.ndarray:
        return self.hmask[:, :, None] & self.zmask[None, None, :]

    def compatible(self, other: "GridSpec") -> bool:
        return (self.nx, self.ny, self.nz, self.h) == (other.nx, other.ny, other.nz, other.h)


def _check_grid(a: GridSpec, b: GridSpec):
    if not a.compatible(b):
        raise IncompatibleFieldsError(f"incompatible grids: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class ScalarField3:
    """Real values on the (x, y, z) collocation points.

    ``basis`` is ``"cos"``, ``"sin"`` or ``None`` for a general field that
    carries no vertical boundary structure.
    """

    grid: GridSpec
    values: np.ndarray
    basis: str | None = COS

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise IncompatibleFieldsError(
                f"values have shape {vals.shape}, grid expects {self.grid.shape}")
        if self.basis not in _BASES:
            raise ValueError(f"unknown basis tag {self.basis!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: GridSpec, basis: str | None = COS) -> "ScalarField3":
        return cls(grid, np.zeros(grid.shape), basis)

    @classmethod
    def from_function(cls, grid: GridSpec, fn, basis: str | None = COS) -> "ScalarField3":
        x, y, z = grid.mesh
        return cls(grid, np.broadcast_to(fn(x, y, z), grid.shape).copy(), basis)

    def _combine(self, other, op):
        if isinstance(other, ScalarField3):
            _check_grid(self.grid, other.grid)
            basis = self.basis if self.basis == other.basis else None
            return ScalarField3(self.grid, op(self.values, other.values), basis)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return ScalarField3(self.grid, -self.values, self.basis)

    def __mul__(self, c):
        if np.isscalar(c):
            return ScalarField3(self.grid, c * self.values, self.basis)
        return NotImplemented

    __rmul__ = __mul__

    def with_basis(self, basis: str | None) -> "ScalarField3":
        return ScalarField3(self.grid, self.values, basis)


@dataclass(frozen=True, eq=False)
class VectorFieldH:
    """Horizontal vector field (u1, u2) with a shared grid and basis tag."""

    u1: ScalarField3
    u2: ScalarField3

    def __post_init__(self):
        _check_grid(self.u1.grid, self.u2.grid)
        if self.u1.basis != self.u2.basis:
            raise ValueError("vector components must share a basis tag")

    @property
    def grid(self) -> GridSpec:
        return self.u1.grid

    @property
    def basis(self):
        return self.u1.basis

    @property
    def components(self) -> tuple[ScalarField3, ScalarField3]:
        return (self.u1, self.u2)

    @classmethod
    def zeros(cls, grid: GridSpec, basis: str | None = COS) -> "VectorFieldH":
        return cls(ScalarField3.zeros(grid, basis), ScalarField3.zeros(grid, basis))

    def __add__(self, other):
        if isinstance(other, VectorFieldH):
            return VectorFieldH(self.u1 + other.u1, self.u2 + other.u2)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, VectorFieldH):
            return VectorFieldH(self.u1 - other.u1, self.u2 - other.u2)
        return NotImplemented

    def __neg__(self):
        return VectorFieldH(-self.u1, -self.u2)

    def __mul__(self, c):
        if np.isscalar(c):
            return VectorFieldH(c * self.u1, c * self.u2)
        return NotImplemented

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ScalarField2:
    """Real values on the horizontal grid of M."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise IncompatibleFieldsError(
                f"values have shape {vals.shape}, grid expects {(self.grid.nx, self.grid.ny)}")
        object.__setattr__(self, "values", vals)

    def _combine(self, other, op):
        if isinstance(other, ScalarField2):
            _check_grid(self.grid, other.grid)
            return ScalarField2(self.grid, op(self.values, other.values))
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return ScalarField2(self.grid, -self.values)

    def __mul__(self, c):
        if np.isscalar(c):
            return ScalarField2(self.grid, c * self.values)
        return NotImplemented

    __rmul__ = __mul__

    def lift(self, basis: str | None = COS) -> ScalarField3:
        """Extend constantly in z."""
        vals = np.repeat(self.values[:, :, None], self.grid.nz, axis=2)
        return ScalarField3(self.grid, vals, basis)


# ---------------------------------------------------------------------------
# transforms


def z_forward(values: np.ndarray, basis: str | None) -> np.ndarray:
    """Vertical modal amplitudes (last axis) of real collocation values."""
    N = values.shape[-1] - 1
    if basis == SIN:
        out = np.zeros(values.shape)
        out[..., 1:N] = sfft.dst(values[..., 1:N], type=1, axis=-1) / N
        return out
    out = sfft.dct(values, type=1, axis=-1) / N
    out[..., 0] *= 0.5
    out[..., N] *= 0.5
    return out


def z_inverse(coef: np.ndarray, basis: str | None) -> np.ndarray:
    """Collocation values from vertical modal amplitudes (last axis)."""
    N = coef.shape[-1] - 1
    if basis == SIN:
        out = np.zeros(coef.shape)
        out[..., 1:N] = 0.5 * sfft.dst(coef[..., 1:N], type=1, axis=-1)
        return out
    y = np.array(coef, dtype=float, copy=True)
    y[..., 1:N] *= 0.5
    return sfft.dct(y, type=1, axis=-1)


def h_forward(values: np.ndarray) -> np.ndarray:
    return np.fft.rfft2(values, axes=(0, 1))


def h_inverse(coef: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.fft.irfft2(coef, s=(grid.nx, grid.ny), axes=(0, 1))


def to_spectral(f: ScalarField3) -> np.ndarray:
    """Fourier x Fourier x (cos|sin) coefficients; ``None`` uses cosines."""
    return h_forward(z_forward(f.values, f.basis))


def from_spectral(grid: GridSpec, coef: np.ndarray, basis: str | None) -> ScalarField3:
    return ScalarField3(grid, z_inverse(h_inverse(coef, grid), basis), basis)


def truncate(f: ScalarField3, basis: str | None = None) -> ScalarField3:
    """Project ``f`` onto the retained modes of its (or the given) basis.

    This is the re-projection applied to every pointwise product: the values
    are expanded in the target basis and all modes outside the grid mask
    (horizontal Nyquist, vertical Nyquist and, if enabled, the upper third)
    are discarded.
    """
    basis = f.basis if basis is None else basis
    if basis is None:
        basis = COS
    coef = h_forward(z_forward(f.values, basis))
    coef *= f.grid.mask
    return from_spectral(f.grid, coef, basis)


def truncate_vector(u: VectorFieldH, basis: str | None = None) -> VectorFieldH:
    return VectorFieldH(truncate(u.u1, basis), truncate(u.u2, basis))


# ---------------------------------------------------------------------------
# horizontal operators


def _hsymbol(grid: GridSpec, ax: int, ay: int) -> np.ndarray:
    return (1j * grid.kx) ** ax * (1j * grid.ky) ** ay


def _hderiv(values: np.ndarray, grid: GridSpec, ax: int, ay: int) -> np.ndarray:
    coef = h_forward(values)
    sym = _hsymbol(grid, ax, ay)
    if values.ndim == 3:
        sym = sym[:, :, None]
    return h_inverse(coef * sym, grid)


def _dx(f, ax=1, ay=0):
    if isinstance(f, ScalarField3):
        return ScalarField3(f.grid, _hderiv(f.values, f.grid, ax, ay), f.basis)
    return ScalarField2(f.grid, _hderiv(f.values, f.grid, ax, ay))


def grad_h(f):
    """Horizontal gradient; a ScalarField2 input returns a pair of 2-D fields."""
    gx, gy = _dx(f, 1, 0), _dx(f, 0, 1)
    if isinstance(f, ScalarField3):
        return VectorFieldH(gx, gy)
    return (gx, gy)


def div_h(u):
    """Horizontal divergence of a VectorFieldH or of a pair of 2-D fields."""
    u1, u2 = u.components if isinstance(u, VectorFieldH) else u
    return _dx(u1, 1, 0) + _dx(u2, 0, 1)


def curl_h(u):
    """Scalar curl d_x u2 - d_y u1."""
    u1, u2 = u.components if isinstance(u, VectorFieldH) else u
    return _dx(u2, 1, 0) - _dx(u1, 0, 1)


def lap_h(f):
    if isinstance(f, VectorFieldH):
        return VectorFieldH(lap_h(f.u1), lap_h(f.u2))
    return _dx(f, 2, 0) + _dx(f, 0, 2)


def inv_lap_h(f):
    """Zero-mean solution g of lap_h g = f (the mean of f is ignored)."""
    grid = f.grid
    coef = h_forward(f.values)
    k2 = grid.k2
    inv = np.where(k2 > 0, -1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    if coef.ndim == 3:
        inv = inv[:, :, None]
    vals = h_inverse(coef * inv, grid)
    if isinstance(f, ScalarField3):
        return ScalarField3(grid, vals, f.basis)
    return ScalarField2(grid, vals)


def partial(f, ax: int = 0, ay: int = 0, az: int = 0):
    """Mixed partial derivative d^ax_x d^ay_y d^az_z of a field.

    Vertical differentiation needs a basis tag; each z-derivative swaps
    cosine and sine.
    """
    if isinstance(f, ScalarField2):
        if az:
            raise ValueError("2-D fields have no vertical derivative")
        return _dx(f, ax, ay) if (ax or ay) else f
    out = f
    for _ in range(az):
        out = ddz(out)
    if ax or ay:
        out = _dx(out, ax, ay)
    return out


# ---------------------------------------------------------------------------
# vertical operators


def _require_basis(f: ScalarField3):
    if f.basis not in (COS, SIN):
        raise ValueError("vertical differentiation needs a cos or sin basis tag")


def ddz(f):
    """Vertical derivative; flips the basis tag between cos and sin."""
    if isinstance(f, VectorFieldH):
        return VectorFieldH(ddz(f.u1), ddz(f.u2))
    _require_basis(f)
    grid = f.grid
    a = z_forward(f.values, f.basis)
    if f.basis == COS:
        b = -grid.kz * a
        b[..., 0] = 0.0
        b[..., grid.N] = 0.0
        return ScalarField3(grid, z_inverse(b, SIN), SIN)
    return ScalarField3(grid, z_inverse(grid.kz * a, COS), COS)


def d2dz2(f):
    """Second vertical derivative; preserves the basis tag."""
    if isinstance(f, VectorFieldH):
        return VectorFieldH(d2dz2(f.u1), d2dz2(f.u2))
    _require_basis(f)
    a = z_forward(f.values, f.basis)
    return ScalarField3(f.grid, z_inverse(-(f.grid.kz**2) * a, f.basis), f.basis)


def vint_from_bottom(f):
    """F(z) = int_{-h}^z f dxi evaluated modally.

    A sine input yields a cosine series.  A cosine (or untagged) input yields
    a sine series plus the linear term a_0 (z + h) coming from its vertical
    mean, so the output is untagged.
    """
    if isinstance(f, VectorFieldH):
        return VectorFieldH(vint_from_bottom(f.u1), vint_from_bottom(f.u2))
    grid = f.grid
    N = grid.N
    m = grid.m[1:N]
    if f.basis == SIN:
        b = z_forward(f.values, SIN)
        a = np.zeros_like(b)
        scaled = b[..., 1:N] * (grid.h / (np.pi * m))
        a[..., 1:N] = -scaled
        a[..., 0] = scaled.sum(axis=-1)
        vals = z_inverse(a, COS)
        vals[..., 0] = 0.0
        return ScalarField3(grid, vals, COS)
    a = z_forward(f.values, COS)
    b = np.zeros_like(a)
    b[..., 1:N] = a[..., 1:N] * (grid.h / (np.pi * m))
    vals = z_inverse(b, SIN) + a[..., :1] * (grid.z + grid.h)
    vals[..., 0] = 0.0
    return ScalarField3(grid, vals, None)


def vertical_average(f):
    """(1/h) int_{-h}^0 f dz as a field on M."""
    if isinstance(f, VectorFieldH):
        return (vertical_average(f.u1), vertical_average(f.u2))
    grid = f.grid
    if f.basis == SIN:
        b = z_forward(f.values, SIN)
        m = grid.m[1:grid.N]
        wts = (1.0 - (-1.0) ** m) / (np.pi * m)
        return ScalarField2(grid, b[..., 1:grid.N] @ wts)
    return ScalarField2(grid, f.values @ grid.zweights / grid.h)


def fluctuation(f):
    """f minus its vertical average."""
    if isinstance(f, VectorFieldH):
        return VectorFieldH(fluctuation(f.u1), fluctuation(f.u2))
    avg = vertical_average(f)
    basis = COS if f.basis == COS else None
    return ScalarField3(f.grid, f.values - avg.values[:, :, None], basis)


# ---------------------------------------------------------------------------
# norms and inner products


def _magnitude(f) -> tuple[GridSpec, np.ndarray, int]:
    """Pointwise Euclidean magnitude of a scalar, vector or tuple field."""
    if isinstance(f, (ScalarField3, ScalarField2)):
        return f.grid, np.abs(f.values), f.values.ndim
    comps = f.components if isinstance(f, VectorFieldH) else tuple(f)
    grid = comps[0].grid
    for c in comps[1:]:
        _check_grid(grid, c.grid)
    mag = np.sqrt(sum(c.values**2 for c in comps))
    return grid, mag, mag.ndim


def integrate(grid: GridSpec, values: np.ndarray) -> float:
    """Quadrature of pointwise values over Omega (3-D) or M (2-D)."""
    if values.ndim == 3:
        return float(np.mean(values @ grid.zweights))
    return float(np.mean(values))


def norm_Lq(f, q=2) -> float:
    """L^q norm over Omega or M; q = inf is the grid maximum."""
    grid, mag, _ = _magnitude(f)
    if np.isinf(q):
        return float(mag.max())
    if q < 1:
        raise ValueError("q must be >= 1")
    return integrate(grid, mag**q) ** (1.0 / q)


def norm_L2(f) -> float:
    return norm_Lq(f, 2)


def inner_L2(f, g) -> float:
    if isinstance(f, (VectorFieldH, tuple)) or isinstance(g, (VectorFieldH, tuple)):
        fc = f.components if isinstance(f, VectorFieldH) else tuple(f)
        gc = g.components if isinstance(g, VectorFieldH) else tuple(g)
        if len(fc) != len(gc):
            raise IncompatibleFieldsError("vector operands differ in length")
        return sum(inner_L2(a, b) for a, b in zip(fc, gc))
    if type(f) is not type(g):
        raise IncompatibleFieldsError("cannot pair a 2-D with a 3-D field")
    _check_grid(f.grid, g.grid)
    return integrate(f.grid, f.values * g.values)


def _multi_indices(order: int, dims: int):
    for alpha in itertools.product(range(order + 1), repeat=dims):
        if sum(alpha) == order:
            yield alpha


def _components(f):
    if isinstance(f, VectorFieldH):
        return f.components
    if isinstance(f, tuple):
        return f
    return (f,)


def seminorm_Hm(f, m: int) -> float:
    """sqrt of the sum of ||D^alpha f||_2^2 over |alpha| = m."""
    total = 0.0
    for c in _components(f):
        dims = 3 if isinstance(c, ScalarField3) else 2
        for alpha in _multi_indices(m, dims):
            total += norm_L2(partial(c, *alpha)) ** 2
    return float(np.sqrt(total))


def seminorm_H1(f) -> float:
    return seminorm_Hm(f, 1)


def seminorm_H2(f) -> float:
    return seminorm_Hm(f, 2)


def norm_Hm(f, m: int) -> float:
    """Full Sobolev norm sqrt(sum_{|alpha| <= m} ||D^alpha f||_2^2)."""
    return float(np.sqrt(sum(seminorm_Hm(f, j) ** 2 for j in range(m + 1))))
