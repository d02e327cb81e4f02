"""Randomized checks of the functional inequalities behind the estimates.

Trial functions are random band-limited Fourier series, cosine or sine in z
for the 3-D kind, whose coefficients depend only on (seed, band_limit), so
the same function can be sampled on grids of different resolution.
Derivatives are evaluated exactly from the coefficients; only the integrals
are discretized.

Every check returns :class:`Entry` objects.  A C-bearing entry has the form
``lhs <= C * scale + offset`` and its ratio is the smallest admissible C;
a constant-free entry asserts ``lhs <= scale`` outright.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import GridSpec, ScalarField3, VectorFieldH, div_h, grad_h, inner_L2, norm_L2, \
    vint_from_bottom

FIELD2D = "field2D"
FIELD3D = "field3D"
CONSTANT_FREE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class TrialFunction:
    """f = Re sum c[a, b, m] exp(2 pi i (a x + b y)) Z_m(z).

    Z_m is cos(m pi (z + h) / h) for zbasis "cos" and sin(...) for "sin";
    2-D trials have a single vertical mode Z_0 = 1.  ``coefficients`` has
    shape (2B+1, 2B+1, M) indexed by a + B, b + B and m.
    """

    kind: str
    seed: int
    band_limit: int
    coefficients: np.ndarray = field(repr=False)
    h: float = 1.0
    zbasis: str = "cos"
    decay: float = 2.0

    @classmethod
    def random(cls, kind: str, seed: int, band_limit: int, decay: float = 2.0,
               h: float = 1.0, zbasis: str = "cos", scale: float | None = None,
               mean: bool = True) -> "TrialFunction":
        """Random amplitudes with |c_k| ~ (1 + |k|)^(-decay) and a random overall scale."""
        if kind not in (FIELD2D, FIELD3D):
            raise ValueError(f"unknown trial kind {kind!r}")
        if band_limit < 0:
            raise ValueError("band_limit must be >= 0")
        rng = np.random.default_rng([seed, band_limit, 0 if kind == FIELD2D else 1])
        B = band_limit
        nm = 1 if kind == FIELD2D else B + 1
        a = np.arange(-B, B + 1)
        mm = np.arange(nm) if zbasis == "cos" else np.arange(1, nm + 1)
        kk = np.sqrt(a[:, None, None] ** 2 + a[None, :, None] ** 2 + (mm[None, None, :] / 2) ** 2)
        c = rng.standard_normal((2 * B + 1, 2 * B + 1, nm)) \
            + 1j * rng.standard_normal((2 * B + 1, 2 * B + 1, nm))
        c = c / (1.0 + kk) ** decay
        if not mean:
            c[B, B, :] = 0.0
        if scale is None:
            scale = 10.0 ** rng.uniform(-1.0, 1.0)
        c = c * scale / max(np.sqrt(np.sum(np.abs(c) ** 2)), 1e-300)
        return cls(kind, seed, band_limit, c, h=h, zbasis=zbasis, decay=decay)

    @property
    def modes_z(self) -> np.ndarray:
        nm = self.coefficients.shape[2]
        return np.arange(nm) if self.zbasis == "cos" else np.arange(1, nm + 1)

    def evaluate(self, grid: GridSpec, dx: int = 0, dy: int = 0, dz: int = 0) -> np.ndarray:
        """Values of d^dx/dx d^dy/dy d^dz/dz f on the grid (2-D array for 2-D trials)."""
        B = self.band_limit
        a = np.arange(-B, B + 1)
        c = self.coefficients * ((2j * np.pi * a[:, None, None]) ** dx
                                 * (2j * np.pi * a[None, :, None]) ** dy)
        ex = np.exp(2j * np.pi * np.outer(a, grid.x))
        ey = np.exp(2j * np.pi * np.outer(a, grid.y))
        g = np.einsum("abm,ax->xbm", c, ex)
        g = np.einsum("xbm,by->xym", g, ey)
        if self.kind == FIELD2D:
            if dz:
                return np.zeros((grid.nx, grid.ny))
            return g[..., 0].real
        kappa = self.modes_z * np.pi / self.h
        phase = (0.0 if self.zbasis == "cos" else -0.5 * np.pi) + 0.5 * np.pi * dz
        zf = kappa[:, None] ** dz * np.cos(np.outer(kappa, grid.z + self.h) + phase)
        return np.einsum("xym,mz->xyz", g, zf).real


@dataclass(frozen=True)
class Entry:
    """One evaluated inequality: lhs <= C * scale + offset (or lhs <= scale)."""

    name: str
    lhs: float
    scale: float
    offset: float = 0.0
    constant_free: bool = False

    @property
    def ratio(self) -> float:
        excess = self.lhs - self.offset
        if excess <= 0:
            return 0.0
        if self.scale == 0:
            return math.inf
        return excess / self.scale

    @property
    def holds(self) -> bool:
        """Constant-free entries only: lhs <= scale up to relative round-off."""
        return self.lhs <= self.scale * (1 + CONSTANT_FREE_RTOL) + 1e-300


@dataclass
class InequalityResult:
    name: str
    samples: int
    ratios: np.ndarray
    empirical_C: float
    drift: float
    constant_free: bool = False
    failures: int = 0
    ratios_fine: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        if self.constant_free:
            return self.failures == 0
        return bool(np.isfinite(self.empirical_C) and self.drift <= 2.0)


# ---------------------------------------------------------------------------
# quadrature helpers

def _grid2(n: int) -> GridSpec:
    return GridSpec(n, n, 3, 1.0, dealias=False)


def _grid3(n: int, h: float) -> GridSpec:
    return GridSpec(n, n, n + 1, h, dealias=False)


def _mean2(a: np.ndarray) -> float:
    return float(np.mean(a))


def _int3(grid: GridSpec, a: np.ndarray) -> float:
    return float(np.mean(a, axis=(0, 1)) @ grid.zweights)


def _lq2(a, q):
    if q == math.inf:
        return float(np.max(np.abs(a)))
    return _mean2(np.abs(a) ** q) ** (1.0 / q)


def _lq3(grid, a, q):
    if q == math.inf:
        return float(np.max(np.abs(a)))
    return _int3(grid, np.abs(a) ** q) ** (1.0 / q)


def _derivs(f: TrialFunction, grid: GridSpec, order: int, vertical: bool = False) -> dict:
    """All derivatives up to ``order`` keyed by (dx, dy, dz)."""
    out = {}
    for k in range(order + 1):
        for dx in range(k + 1):
            dy = k - dx
            out[(dx, dy, 0)] = f.evaluate(grid, dx, dy)
    if vertical:
        out[(0, 0, 1)] = f.evaluate(grid, 0, 0, 1)
    return out


def _hnorm2(d: dict, m: int) -> float:
    """Full H^m(M) norm over horizontal multi-indices (counted with multiplicity)."""
    total = 0.0
    for k in range(m + 1):
        for combo in itertools.product((0, 1), repeat=k):
            dx = combo.count(0)
            total += _mean2(d[(dx, k - dx, 0)] ** 2)
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# C-bearing inequalities on M

def check_sobolev_2d(f: TrialFunction, n: int) -> list[Entry]:
    """Ladyzhenskaya-type bounds on the torus for a 2-D trial sampled on n x n."""
    grid = _grid2(n)
    d = _derivs(f, grid, 2)
    phi = d[(0, 0, 0)]
    grad_mag = np.hypot(d[(1, 0, 0)], d[(0, 1, 0)])
    l2 = _lq2(phi, 2)
    h1 = _hnorm2(d, 1)
    h2 = _hnorm2(d, 2)
    g4 = _lq2(grad_mag, 4)
    return [
        Entry("SI-1", _lq2(phi, 4), math.sqrt(l2 * h1)),
        Entry("SI-2", _lq2(phi, 8), _lq2(phi, 6) ** 0.75 * h1**0.25),
        Entry("SI-11", g4, math.sqrt(_lq2(phi, math.inf) * h2)),
        Entry("SI-111", g4, math.sqrt(l2 * float(np.max(grad_mag))), offset=l2),
    ]


def _wmq(parts: list[dict], m: int, q: float) -> float:
    """W^{m,q}(M) norm of a tuple of scalars given their derivative tables."""
    total = 0.0
    for d in parts:
        for k in range(m + 1):
            for combo in itertools.product((0, 1), repeat=k):
                dx = combo.count(0)
                total += _mean2(np.abs(d[(dx, k - dx, 0)]) ** q)
    return total ** (1.0 / q)


def _shift(d: dict, ax: int, ay: int) -> dict:
    return {(i, j, 0): d[(i + ax, j + ay, 0)] for (i, j, k) in d
            if (i + ax, j + ay, 0) in d}


def check_div_curl(u1: TrialFunction, u2: TrialFunction, n: int,
                   ms=(0, 1), qs=(2, 4)) -> list[Entry]:
    """||grad phi||_{W^{m,q}} vs ||div phi||_{W^{m,q}} + ||curl phi||_{W^{m,q}}."""
    grid = _grid2(n)
    order = max(ms) + 1
    d1 = _derivs(u1, grid, order)
    d2 = _derivs(u2, grid, order)
    grads = [_shift(d1, 1, 0), _shift(d1, 0, 1), _shift(d2, 1, 0), _shift(d2, 0, 1)]
    div = {k: grads[0][k] + grads[3][k] for k in grads[0]}
    curl = {k: grads[2][k] - grads[1][k] for k in grads[0]}
    out = []
    for m in ms:
        for q in qs:
            out.append(Entry(f"DIV-CUR[m={m},q={q}]", _wmq(grads, m, q),
                             _wmq([div], m, q) + _wmq([curl], m, q)))
    return out


def log_plus(r: float) -> float:
    return math.log(r) if r >= 1 else 0.0


def check_log_inequalities(f: TrialFunction, g: TrialFunction, n: int) -> list[Entry]:
    """Logarithmic sup-norm bounds; (f, g) also serve as a 2-D vector field."""
    grid = _grid2(n)
    d = _derivs(f, grid, 2)
    bw1 = Entry("BW-1", _lq2(d[(0, 0, 0)], math.inf),
                _hnorm2(d, 1) * math.sqrt(1 + log_plus(_hnorm2(d, 2))))
    df = _derivs(f, grid, 3)
    dg = _derivs(g, grid, 3)
    grads = [_shift(df, 1, 0), _shift(df, 0, 1), _shift(dg, 1, 0), _shift(dg, 0, 1)]
    grad_sup = float(np.max(np.sqrt(sum(gr[(0, 0, 0)] ** 2 for gr in grads))))
    div = grads[0][(0, 0, 0)] + grads[3][(0, 0, 0)]
    curl = grads[2][(0, 0, 0)] - grads[1][(0, 0, 0)]
    grad_h2 = math.sqrt(sum(_hnorm2(gr, 2) ** 2 for gr in grads))
    bw2 = Entry("BW-2", grad_sup,
                (_lq2(div, math.inf) + _lq2(curl, math.inf)) * (1 + log_plus(grad_h2)))
    return [bw1, bw2]


def check_power_interp(f: TrialFunction, n: int, qs=(1, 2, 3)) -> list[Entry]:
    """Identity ||phi||_{4q}^{4q} = || |phi|^q ||_4^4 and the two bounds that follow.

    For each q three entries are produced: ``TWE-id[q]`` (constant-free, lhs is
    the identity defect and scale the absolute tolerance), ``TWE-mid[q]``
    (the first inequality, SI-1 applied to |phi|^q) and ``TWE[q]`` (the final
    bound with the additive ||phi||_{2q}^{4q} term).
    """
    grid = _grid2(n)
    d = _derivs(f, grid, 1)
    phi = d[(0, 0, 0)]
    grad2 = d[(1, 0, 0)] ** 2 + d[(0, 1, 0)] ** 2
    out = []
    for q in qs:
        a = np.abs(phi)
        lhs = _mean2(a ** (4 * q))
        pq = a**q
        identity = _lq2(pq, 4) ** 4
        out.append(Entry(f"TWE-id[q={q}]", abs(lhs - identity),
                         1e-10 * max(lhs, 1e-300), constant_free=True))
        grad_pq2 = (q * a ** (q - 1)) ** 2 * grad2
        h1_pq2 = _mean2(pq**2) + _mean2(grad_pq2)
        out.append(Entry(f"TWE-mid[q={q}]", identity, _mean2(pq**2) * h1_pq2))
        n2q = _lq2(phi, 2 * q)
        weighted = _mean2(a ** (2 * q - 2) * grad2)
        out.append(Entry(f"TWE[q={q}]", lhs, n2q ** (2 * q) * weighted, offset=n2q ** (4 * q)))
    return out


# ---------------------------------------------------------------------------
# inequalities on the channel

def check_sobolev_3d(f: TrialFunction, n: int) -> list[Entry]:
    grid = _grid3(n, f.h)
    psi = f.evaluate(grid)
    grad2 = f.evaluate(grid, 1, 0) ** 2 + f.evaluate(grid, 0, 1) ** 2 \
        + f.evaluate(grid, 0, 0, 1) ** 2
    l2 = _lq3(grid, psi, 2)
    h1 = math.sqrt(l2**2 + _int3(grid, grad2))
    return [
        Entry("SI1", _lq3(grid, psi, 3), math.sqrt(l2 * h1)),
        Entry("SI2", _lq3(grid, psi, 6), h1),
    ]


def _vint_full(grid: GridSpec, a: np.ndarray) -> np.ndarray:
    return a @ grid.zweights


def check_anisotropic(p1: TrialFunction, p2: TrialFunction, p3: TrialFunction,
                      n: int) -> list[Entry]:
    """Triple products with one full vertical integral on each factor."""
    grid = _grid3(n, p1.h)
    s1, s2, s3 = (p.evaluate(grid) for p in (p1, p2, p3))
    g1 = math.sqrt(_int3(grid, p1.evaluate(grid, 1, 0) ** 2 + p1.evaluate(grid, 0, 1) ** 2))
    d2x, d2y = p2.evaluate(grid, 1, 0), p2.evaluate(grid, 0, 1)
    g2 = math.sqrt(_int3(grid, d2x**2 + d2y**2))
    hess2 = math.sqrt(_int3(grid, p2.evaluate(grid, 2, 0) ** 2 + 2 * p2.evaluate(grid, 1, 1) ** 2
                            + p2.evaluate(grid, 0, 2) ** 2))
    n1, n2, n3 = (_lq3(grid, s, 2) for s in (s1, s2, s3))
    inner1 = _vint_full(grid, s1)
    lhs1 = abs(_mean2(inner1 * _vint_full(grid, s2 * s3)))
    lhs2 = abs(_mean2(inner1 * _vint_full(grid, np.hypot(d2x, d2y) * s3)))
    base = n1 * n2 * n3
    return [
        Entry("MAIN-1", lhs1, math.sqrt(n1 * g1 * n2 * g2) * n3, offset=base),
        Entry("MAIN-2", lhs2, math.sqrt(n1 * g1 * _lq3(grid, s2, math.inf) * hess2) * n3,
              offset=base),
    ]


# ---------------------------------------------------------------------------
# constant-free inequalities

def check_minkowski(f: TrialFunction, n: int, ps=(2, 4)) -> list[Entry]:
    """Integral Minkowski inequality with outer domain M and inner domain (-h, 0)."""
    grid = _grid3(n, f.h)
    a = np.abs(f.evaluate(grid))
    out = []
    for p in ps:
        lhs = _mean2(_vint_full(grid, a) ** p) ** (1.0 / p)
        rhs = float(np.mean(a**p, axis=(0, 1)) ** (1.0 / p) @ grid.zweights)
        out.append(Entry(f"MKY[p={p}]", lhs, rhs, constant_free=True))
    return out


def check_cauchy_schwarz(f: TrialFunction, g: TrialFunction, k: TrialFunction,
                         n: int) -> list[Entry]:
    """Cauchy-Schwarz and Hoelder instances on the channel, plus the vertical one."""
    grid = _grid3(n, f.h)
    a, b, c = f.evaluate(grid), g.evaluate(grid), k.evaluate(grid)
    la, lb = _lq3(grid, a, 2), _lq3(grid, b, 2)
    col = _vint_full(grid, a) ** 2
    col_rhs = f.h * _vint_full(grid, a**2)
    return [
        Entry("CS-L2", abs(_int3(grid, a * b)), la * lb, constant_free=True),
        Entry("CS-vertical", float(np.max(col / np.where(col_rhs > 0, col_rhs, 1.0))),
              1.0, constant_free=True),
        Entry("Hoelder-2-4-4", _int3(grid, np.abs(a * b * c)),
              la * _lq3(grid, b, 4) * _lq3(grid, c, 4), constant_free=True),
    ]


def check_coupling_bounds(v1: TrialFunction, v2: TrialFunction, T: TrialFunction,
                          n: int) -> list[Entry]:
    """Bounds on the buoyancy and vertical-advection couplings.

    |<grad_H int_{-h}^z T, v>| <= h ||T|| ||grad_H v||  and
    (1/h) |<int_{-h}^z div_H v, T>| <= ||grad_H v|| ||T||,
    evaluated with the solver's spectral operators.
    """
    grid = _grid3(n, T.h)
    v = VectorFieldH(ScalarField3(grid, v1.evaluate(grid), v1.zbasis),
                     ScalarField3(grid, v2.evaluate(grid), v2.zbasis))
    Tf = ScalarField3(grid, T.evaluate(grid), T.zbasis)
    grad_v = math.sqrt(sum(norm_L2(grad_h(c)) ** 2 for c in v.components))
    nT = norm_L2(Tf)
    buoy = abs(inner_L2(grad_h(vint_from_bottom(Tf)), v))
    coup = abs(inner_L2(vint_from_bottom(div_h(v)), Tf)) / grid.h
    return [
        Entry("DT-4", buoy, grid.h * nT * grad_v, constant_free=True),
        Entry("T-INT", coup, grad_v * nT, constant_free=True),
    ]


# ---------------------------------------------------------------------------
# sweep


def _sample_entries(seed: int, band_limit: int, n: int, h: float) -> list[Entry]:
    t2 = lambda s, **kw: TrialFunction.random(FIELD2D, s, band_limit, **kw)  # noqa: E731
    t3 = lambda s, **kw: TrialFunction.random(FIELD3D, s, band_limit, h=h, **kw)  # noqa: E731
    base = 10 * seed
    f = t2(base)
    rough = t2(base + 2, decay=1.0)
    rough_g = t2(base + 3, decay=1.0)
    p1, p2, p3 = t3(base), t3(base + 1), t3(base + 2)
    entries = []
    entries += check_sobolev_2d(f, n)
    entries += check_div_curl(t2(base + 4, mean=False), t2(base + 5, mean=False), n)
    entries += check_log_inequalities(rough, rough_g, n)
    entries += check_power_interp(f, n)
    entries += check_sobolev_3d(p1, n)
    entries += check_anisotropic(p1, p2, p3, n)
    entries += check_minkowski(p1, n)
    entries += check_cauchy_schwarz(p1, p2, p3, n)
    entries += check_coupling_bounds(p1, p2, t3(base + 3, zbasis="sin"), n)
    return entries


def _collect(seeds, band_limit, n, h):
    table: dict[str, list[Entry]] = {}
    for s in seeds:
        for e in _sample_entries(s, band_limit, n, h):
            table.setdefault(e.name, []).append(e)
    return table


def run_lab(samples: int = 100, band_limit: int = 8, resolution: int = 16,
            seed: int = 0, h: float = 1.0) -> list[InequalityResult]:
    """Evaluate every inequality on ``samples`` trials at resolution n and 2n.

    ``empirical_C`` is the maximum ratio at the base resolution; ``drift`` is
    max(C_2n / C_n, C_n / C_2n) (1 when both vanish).  Constant-free entries
    count failures over both resolutions.
    """
    if samples < 1:
        raise ValueError("ineq.samples must be >= 1")
    if 2 * band_limit > resolution:
        raise ValueError("ineq.band_limit must be at most half the resolution")
    seeds = [seed * 100_003 + i for i in range(samples)]
    coarse = _collect(seeds, band_limit, resolution, h)
    fine = _collect(seeds, band_limit, 2 * resolution, h)
    results = []
    for name, entries in coarse.items():
        r1 = np.array([e.ratio for e in entries])
        r2 = np.array([e.ratio for e in fine[name]])
        c1, c2 = float(r1.max()), float(r2.max())
        if c1 == 0 and c2 == 0:
            drift = 1.0
        elif c1 == 0 or c2 == 0:
            drift = math.inf
        else:
            drift = max(c1 / c2, c2 / c1)
        cf = entries[0].constant_free
        failures = sum(not e.holds for e in entries + fine[name]) if cf else 0
        results.append(InequalityResult(name, len(entries), r1, c1, drift, cf, failures, r2))
    return results
