"""Functionals, a priori bounds and certificates along computed trajectories.

Every bound carries an unspecified generic constant ``C``.  A certificate
pairs a bound with the functional it controls and reports the smallest ``C``
for which the bound holds over the whole run, so each certificate doubles as
an estimator of that constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    ScalarField3,
    VectorFieldH,
    curl_h,
    ddz,
    div_h,
    fluctuation,
    grad_h,
    h_forward,
    h_inverse,
    integrate,
    lap_h,
    norm_Hm,
    norm_L2,
    norm_Lq,
    vertical_average,
)
from .integrator import StepperConfig, cfl_dt, step
from .model import (
    ConfigurationError,
    ModelParams,
    State,
    energy_budget,
    reconstruct_physical_T,
)


@dataclass(frozen=True, eq=False)
class DerivedVars:
    u: VectorFieldH
    beta: VectorFieldH
    zeta: VectorFieldH
    eta: ScalarField3
    theta: ScalarField3


@dataclass(frozen=True)
class FunctionalSample:
    t: float
    values: dict

    def __getitem__(self, key):
        return self.values[key]


def solve_beta(T: ScalarField3) -> VectorFieldH:
    """Per-level solution of lap_H beta = grad_H T with zero horizontal mean."""
    grid = T.grid
    coef = h_forward(T.values)
    k2 = grid.k2[:, :, None]
    inv = np.where(k2 > 0, -1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    b1 = h_inverse(coef * (1j * grid.kx[:, :, None]) * inv, grid)
    b2 = h_inverse(coef * (1j * grid.ky[:, :, None]) * inv, grid)
    return VectorFieldH(ScalarField3(grid, b1, T.basis), ScalarField3(grid, b2, T.basis))


def derived_vars(s: State, p: ModelParams) -> DerivedVars:
    u = ddz(s.v)
    beta = solve_beta(s.T)
    zeta = u + p.R1 * beta
    eta = curl_h(zeta)
    theta = div_h(u) + p.R1 * s.T
    return DerivedVars(u=u, beta=beta, zeta=zeta, eta=eta, theta=theta)


def c_R(p: ModelParams) -> float:
    """Weight of the temperature blocks in the composite X."""
    return 2 * p.R1**2 * (p.R1 + p.R2) * (p.R2 - p.R3) ** 2 / (p.R2**2 * p.R3)


def _grad_sq(f) -> float:
    """||grad_H f||_2^2 for scalar, vector, or 2-D tuple fields."""
    comps = f.components if isinstance(f, VectorFieldH) else (f if isinstance(f, tuple) else (f,))
    total = 0.0
    for c in comps:
        g = grad_h(c)
        total += norm_L2(g) ** 2
    return total


def _lap_sq(f) -> float:
    comps = f.components if isinstance(f, VectorFieldH) else (f if isinstance(f, tuple) else (f,))
    return sum(norm_L2(lap_h(c)) ** 2 for c in comps)


def _grad_mag2(u: VectorFieldH) -> np.ndarray:
    """Pointwise |grad_H u|^2 (Frobenius)."""
    total = 0.0
    for c in u.components:
        g = grad_h(c)
        total = total + g.u1.values**2 + g.u2.values**2
    return total


def _mag2(u: VectorFieldH) -> np.ndarray:
    return u.u1.values**2 + u.u2.values**2


SERIES_COLUMNS = (
    "t",
    "norm_v_L2",
    "norm_T_L2",
    "norm_T_inf",
    "norm_Tphys_inf",
    "norm_vtilde_L6",
    "norm_gradH_vbar_L2",
    "norm_u_L6",
    "norm_uz_L2",
    "eta_L2",
    "theta_L2",
    "lapH_eta_L2",
    "lapH_theta_L2",
    "lapH_T_L2",
    "gradH_Tz_L2",
    "gradH_lapH_vbar_L2",
    "lapH_vbar_L2",
    "X",
    "Z",
    "Y",
    "diss_K1",
    "diss_K3",
    "diss_K5",
    "diss_K6",
    "diss_K7",
    "energy_rate",
    "dissipation",
    "energy_margin",
    "energy_residual",
    "div_vbar_inf",
    "maxprin_margin",
)


def composite_X(parts: dict, cr: float) -> float:
    return (1.0 + parts["gradH_lapH_vbar"] + cr * parts["lapH_T"] + cr * parts["gradH_Tz"]
            + parts["lapH_eta"] + parts["gradH_eta_z"] + parts["lapH_theta"]
            + parts["gradH_theta_z"])


def sample_functionals(s: State, p: ModelParams, T0_inf: float | None = None) -> FunctionalSample:
    """Evaluate every monitored functional on one state.

    ``T0_inf`` is the sup norm of the initial physical temperature; without
    it the max-principle margin is reported as NaN.
    """
    grid = s.grid
    v, T = s.v, s.T
    dv = derived_vars(s, p)
    u, eta, theta = dv.u, dv.eta, dv.theta
    vbar = vertical_average(v)
    vt = fluctuation(v)
    uz = ddz(u)
    Tz = ddz(T)
    eta_z, theta_z = ddz(eta), ddz(theta)
    lap_vbar = tuple(lap_h(c) for c in vbar)

    sq = {
        "gradH_lapH_vbar": _grad_sq(lap_vbar),
        "lapH_T": _lap_sq(T),
        "gradH_Tz": _grad_sq(Tz),
        "lapH_eta": _lap_sq(eta),
        "gradH_eta_z": _grad_sq(eta_z),
        "lapH_theta": _lap_sq(theta),
        "gradH_theta_z": _grad_sq(theta_z),
    }
    X = composite_X(sq, c_R(p))
    Y = (_lap_sq(lap_vbar) + _lap_sq(Tz) + _grad_sq(ddz(Tz)) + _grad_sq(lap_h(eta))
         + _lap_sq(eta_z) + _grad_sq(lap_h(theta)) + _lap_sq(theta_z))

    vt_mag2 = _mag2(vt)
    vtz = ddz(vt)
    vtz_mag2 = _mag2(vtz)
    diss3 = (integrate(grid, _grad_mag2(vt) * vt_mag2**2) / p.R1
             + integrate(grid, vtz_mag2 * vtz_mag2**2) / p.R2)
    u_mag2 = _mag2(u)
    diss5 = (integrate(grid, u_mag2**2 * _grad_mag2(u)) / p.R1
             + integrate(grid, u_mag2**2 * _mag2(uz)) / p.R2)
    diss6 = _grad_sq(uz) / p.R1 + norm_L2(ddz(uz)) ** 2 / p.R2
    diss7 = ((_grad_sq(eta) + _grad_sq(theta)) / p.R1
             + (norm_L2(eta_z) ** 2 + norm_L2(theta_z) ** 2) / p.R2)

    budget = energy_budget(s, p)
    Q = p.source(grid)
    dissipation = budget["grad_v2"] / p.R1 + budget["vz2"] / p.R2 + budget["Tz2"] / p.R3
    norm_T = norm_L2(T)
    energy_rate = 2.0 * budget["rate"]
    energy_margin = (norm_L2(Q) ** 2 + (1 + p.R1) * (1 + p.h) ** 2 * norm_T**2
                     - (energy_rate + dissipation))
    T_phys_inf = norm_Lq(reconstruct_physical_T(T, p.h), math.inf)
    if T0_inf is None:
        margin = math.nan
    else:
        margin = max_principle_bound(T0_inf, norm_Lq(Q, math.inf), s.t) - T_phys_inf

    values = {
        "t": s.t,
        "norm_v_L2": norm_L2(v),
        "norm_T_L2": norm_T,
        "norm_T_inf": norm_Lq(T, math.inf),
        "norm_Tphys_inf": T_phys_inf,
        "norm_vtilde_L6": norm_Lq(vt, 6),
        "norm_gradH_vbar_L2": math.sqrt(_grad_sq(vbar)),
        "norm_u_L6": norm_Lq(u, 6),
        "norm_uz_L2": norm_L2(uz),
        "eta_L2": norm_L2(eta),
        "theta_L2": norm_L2(theta),
        "lapH_eta_L2": math.sqrt(sq["lapH_eta"]),
        "lapH_theta_L2": math.sqrt(sq["lapH_theta"]),
        "lapH_T_L2": math.sqrt(sq["lapH_T"]),
        "gradH_Tz_L2": math.sqrt(sq["gradH_Tz"]),
        "gradH_lapH_vbar_L2": math.sqrt(sq["gradH_lapH_vbar"]),
        "lapH_vbar_L2": math.sqrt(_lap_sq(vbar)),
        "X": X,
        "Z": math.log(X),
        "Y": Y,
        "diss_K1": budget["grad_v2"] + budget["vz2"] + budget["Tz2"],
        "diss_K3": diss3,
        "diss_K5": diss5,
        "diss_K6": diss6,
        "diss_K7": diss7,
        "energy_rate": energy_rate,
        "dissipation": dissipation,
        "energy_margin": energy_margin,
        "energy_residual": budget["rate"] - budget["predicted"],
        "div_vbar_inf": norm_Lq(div_h(vbar), math.inf),
        "maxprin_margin": margin,
    }
    return FunctionalSample(t=s.t, values=values)


def reconstruction_ratio(s: State, p: ModelParams) -> float:
    """||grad_H u||_2 / (||eta||_2 + ||theta||_2 + ||T||_2), 0 for a zero denominator."""
    dv = derived_vars(s, p)
    num = math.sqrt(_grad_sq(dv.u))
    den = norm_L2(dv.eta) + norm_L2(dv.theta) + norm_L2(s.T)
    return num / den if den > 0 else 0.0


class FunctionalMonitor:
    """Callable monitor for :func:`pechannel.integrator.run`."""

    def __init__(self, p: ModelParams, T0_inf: float | None = None):
        self.p = p
        self.T0_inf = T0_inf

    def __call__(self, s: State) -> dict:
        return dict(sample_functionals(s, self.p, self.T0_inf).values)


# ---------------------------------------------------------------------------
# initial norms and the bound ladder

INIT_NORM_KEYS = (
    "v0_L2", "T0_L2", "v0_H1", "dzv0_H1", "v0_H4", "T0_H2",
    "Q_L2", "Q_inf", "lapH_Q_L2", "gradH_Qz_L2", "T0_inf",
)


def initial_norms(s0: State, p: ModelParams) -> dict:
    """Norms of the initial data and the source referenced by the bounds.

    T0_L2 and T0_H2 refer to the shifted temperature that the energy
    estimates work with; T0_inf is the sup norm of the physical temperature.
    """
    grid = s0.grid
    Q = p.source(grid)
    return {
        "v0_L2": norm_L2(s0.v),
        "T0_L2": norm_L2(s0.T),
        "v0_H1": norm_Hm(s0.v, 1),
        "dzv0_H1": norm_Hm(ddz(s0.v), 1),
        "v0_H4": norm_Hm(s0.v, 4),
        "T0_H2": norm_Hm(s0.T, 2),
        "Q_L2": norm_L2(Q),
        "Q_inf": norm_Lq(Q, math.inf),
        "lapH_Q_L2": norm_L2(lap_h(Q)),
        "gradH_Qz_L2": math.sqrt(_grad_sq(ddz(Q))),
        "T0_inf": norm_Lq(reconstruct_physical_T(s0.T, p.h), math.inf),
    }


def _need(norms: dict, key: str) -> float:
    try:
        return float(norms[key])
    except KeyError:
        raise ConfigurationError(f"init_norms is missing {key!r}") from None


def _exp(x):
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(x)


def _mul(a, b):
    """Product with 0 * inf taken as 0."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    return np.where((a == 0) | (b == 0), 0.0, out)


def _pow(a, e):
    with np.errstate(over="ignore"):
        return np.power(a, e)


def max_principle_bound(T0_inf: float, Q_inf: float, t):
    return 1.0 + T0_inf + Q_inf * np.asarray(t, float)


def bound_ladder(p: ModelParams, norms: dict, t, C: float, k6_norm: str = "v0_H1") -> dict:
    """Evaluate K1..K8 and K at times ``t`` (scalar or array) for constant C.

    K2 inside the exponents of K3..K7 is evaluated at the same t.  K6 uses
    ||v0||_H1 as printed; ``k6_norm="dzv0_H1"`` selects the ||d_z v0||_H1
    reading instead.
    """
    if k6_norm not in ("v0_H1", "dzv0_H1"):
        raise ValueError("k6_norm must be 'v0_H1' or 'dzv0_H1'")
    t = np.asarray(t, float)
    n = {k: _need(norms, k) for k in INIT_NORM_KEYS if k in _LADDER_KEYS}
    K1 = _mul(C, (n["v0_L2"] ** 2 + n["T0_L2"] ** 2) * _exp((1 + p.R1) * (1 + p.h) ** 2 * t)
              + n["Q_L2"] ** 2 * t)
    K2 = max_principle_bound(n["T0_inf"], n["Q_inf"], t)
    K3 = _mul(_exp(_mul(_pow(K1, 2), t)), n["v0_H1"] ** 6 + _pow(K2, 4) * t)
    K4 = _mul(_exp(_mul(_pow(K2, 2), t)), n["v0_H1"] ** 2 + K2 + K3)
    K5 = _mul(_exp(_mul(1 + _pow(K3, 2 / 3) + _pow(K4, 2), t)),
              n["dzv0_H1"] ** 6 + _pow(K2, 6) * t)
    K6 = _mul(C, _mul(_exp(_mul(_pow(K3, 2 / 3) + _pow(K5, 2 / 3), t)), n[k6_norm] ** 2 + K1))
    K7 = _mul(C, _mul(
        _exp(_mul(K1 + _pow(K3, 2 / 3) + _pow(K5, 2 / 3) + _pow(K6, 2), t)),
        n["v0_H1"] ** 2 + K1 + n["Q_L2"] ** 2
        + _mul(_pow(K2, 2), K2 + _pow(K3, 1 / 3) + _pow(K5, 1 / 3) + K6)))
    tail = (1 + n["v0_H4"] ** 2 + n["T0_H2"] ** 2 + t + n["lapH_Q_L2"] ** 2 * t
            + n["gradH_Qz_L2"] ** 2 * t)
    K = _mul(_exp(_mul(C, K1 + K2 + K7)), tail)
    return {"K1": K1, "K2": K2, "K3": K3, "K4": K4, "K5": K5, "K6": K6, "K7": K7,
            "K": K, "K8": K.copy()}


_LADDER_KEYS = set(INIT_NORM_KEYS)
BOUND_NAMES = ("K1", "K2", "K3", "K4", "K5", "K6", "K7", "K8", "K")


def eval_bound(name: str, p: ModelParams, init_norms: dict, t: float, C: float,
               k6_norm: str = "v0_H1") -> float:
    if name not in BOUND_NAMES:
        raise ConfigurationError(f"unknown bound {name!r}")
    for key in INIT_NORM_KEYS:
        _need(init_norms, key)
    return float(bound_ladder(p, init_norms, t, C, k6_norm)[name])


# ---------------------------------------------------------------------------
# certificates

# Each certificate name pairs with exactly one monitored combination; the
# listed columns are the ones it reads from the series.
PAIRINGS = {
    "K1": ("norm_v_L2", "norm_T_L2", "diss_K1"),
    "K2": ("norm_Tphys_inf",),
    "K3": ("norm_vtilde_L6", "diss_K3"),
    "K4": ("norm_gradH_vbar_L2", "lapH_vbar_L2"),
    "K5": ("norm_u_L6", "diss_K5"),
    "K6": ("norm_uz_L2", "diss_K6"),
    "K7": ("eta_L2", "theta_L2", "diss_K7"),
    "K8": ("Y",),
    "K": ("Z",),
    "max_principle": ("norm_Tphys_inf",),
    "energy_inequality": ("energy_rate", "dissipation", "norm_T_L2"),
}
C_FREE = ("K2", "max_principle", "energy_inequality")


@dataclass
class CertificateReport:
    """Monitored-vs-bound series for one named estimate.

    For C-bearing bounds ``empirical_C`` is the smallest constant making
    monitored <= bound at every sample; for C-free ones it is the largest
    ratio monitored / bound.  ``bound`` is evaluated at the supplied ``C``.
    """

    name: str
    times: np.ndarray
    monitored: np.ndarray
    bound: np.ndarray
    empirical_C: float
    C: float
    passed: bool
    extra: dict = field(default_factory=dict)


def _rows(series) -> list[dict]:
    rows = [dict(s.values) if isinstance(s, FunctionalSample) else dict(s) for s in series]
    if not rows:
        raise ValueError("certify needs a non-empty series")
    t = np.array([r["t"] for r in rows], float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("series must be strictly time-ordered")
    return rows


def _cumtrapz(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def monitored_series(name: str, rows: list[dict], p: ModelParams) -> np.ndarray:
    col = lambda k: np.array([r[k] for r in rows], float)  # noqa: E731
    t = col("t")
    if name == "K1":
        return col("norm_v_L2") ** 2 + col("norm_T_L2") ** 2 + _cumtrapz(t, col("diss_K1"))
    if name in ("K2", "max_principle"):
        return col("norm_Tphys_inf")
    if name == "K3":
        return col("norm_vtilde_L6") ** 6 + _cumtrapz(t, col("diss_K3"))
    if name == "K4":
        return col("norm_gradH_vbar_L2") ** 2 + _cumtrapz(t, col("lapH_vbar_L2") ** 2) / p.R1
    if name == "K5":
        return col("norm_u_L6") ** 6 + _cumtrapz(t, col("diss_K5"))
    if name == "K6":
        return col("norm_uz_L2") ** 2 + _cumtrapz(t, col("diss_K6"))
    if name == "K7":
        return col("eta_L2") ** 2 + col("theta_L2") ** 2 + _cumtrapz(t, col("diss_K7"))
    if name == "K8":
        return _cumtrapz(t, col("Y"))
    if name == "K":
        return col("Z")
    if name == "energy_inequality":
        return col("energy_rate") + col("dissipation")
    raise ValueError(f"unknown certificate {name!r}")


def minimal_constant(monitored: np.ndarray, bound_of_C) -> float:
    """Smallest C >= 0 with monitored <= bound_of_C(C) everywhere.

    ``bound_of_C`` must be nondecreasing in C.  Returns inf if no finite
    constant works.
    """
    def ok(C):
        return bool(np.all(monitored <= bound_of_C(C)))

    if ok(0.0):
        return 0.0
    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > 1e300:
            return math.inf
    lo = 0.0 if hi == 1.0 else hi / 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def certificate(name: str, series, p: ModelParams, init_norms: dict, C: float = 1.0,
                monitored: str | tuple | None = None, tol: float | None = None) -> CertificateReport:
    """Build one certificate; ``monitored`` (if given) must match the pairing."""
    if name not in PAIRINGS:
        raise ValueError(f"unknown certificate {name!r}")
    if monitored is not None:
        want = PAIRINGS[name]
        got = (monitored,) if isinstance(monitored, str) else tuple(monitored)
        if got != want and not (len(got) == 1 and got[0] == want[0] and len(want) == 1):
            raise ValueError(f"certificate {name} pairs with {want}, not {got}")
    rows = _rows(series)
    t = np.array([r["t"] for r in rows], float)
    mon = monitored_series(name, rows, p)

    if name in C_FREE:
        if name == "energy_inequality":
            tol = 1e-6 if tol is None else tol
            normT = np.array([r["norm_T_L2"] for r in rows], float)
            bound = (_need(init_norms, "Q_L2") ** 2
                     + (1 + p.R1) * (1 + p.h) ** 2 * normT**2)
        else:
            tol = (1e-6 if name == "max_principle" else 0.0) if tol is None else tol
            bound = max_principle_bound(_need(init_norms, "T0_inf"),
                                        _need(init_norms, "Q_inf"), t)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(bound != 0, mon / bound, np.where(mon > 0, np.inf, 0.0))
        emp = float(np.max(ratios))
        passed = bool(np.all(mon <= bound + tol))
        return CertificateReport(name, t, mon, bound, emp, C, passed,
                                 {"min_margin": float(np.min(bound - mon)), "tol": tol})

    for key in INIT_NORM_KEYS:
        _need(init_norms, key)

    def bound_of(Cv):
        return bound_ladder(p, init_norms, t, Cv)[name]

    emp = minimal_constant(mon, bound_of)
    bound = bound_of(C)
    passed = bool(np.all(mon <= bound))
    return CertificateReport(name, t, mon, bound, emp, C, passed)


def certify(series, p: ModelParams, init_norms: dict, C: float = 1.0,
            names=None) -> list[CertificateReport]:
    """Certificates for every paired estimate (or the requested ``names``)."""
    names = list(PAIRINGS) if names is None else list(names)
    rows = _rows(series)
    return [certificate(n, rows, p, init_norms, C) for n in names]


def max_principle_check(s: State, p: ModelParams, T0_inf: float, tol: float = 1e-6) -> dict:
    """Compare ||T_phys(t)||_inf with 1 + ||T0||_inf + ||Q||_inf t."""
    Q_inf = norm_Lq(p.source(s.grid), math.inf)
    bound = float(max_principle_bound(T0_inf, Q_inf, s.t))
    mon = norm_Lq(reconstruct_physical_T(s.T, p.h), math.inf)
    return {"t": s.t, "monitored": mon, "bound": bound, "margin": bound - mon,
            "passed": mon <= bound + tol}


# ---------------------------------------------------------------------------
# twin runs


def difference_norm2(a: State, b: State) -> float:
    """D = ||v_a - v_b||^2 + ||T_a - T_b||^2."""
    return norm_L2(a.v - b.v) ** 2 + norm_L2(a.T - b.T) ** 2


def growth_integrand(s: State) -> float:
    """||v||_6^4 + ||grad_H T||_{H^1}^2 + ||v_z||_6^4 + ||d_z lap_H T||_2^2."""
    T = s.T
    gT = grad_h(T)
    return (norm_Lq(s.v, 6) ** 4 + norm_Hm(gT, 1) ** 2 + norm_Lq(ddz(s.v), 6) ** 4
            + norm_L2(ddz(lap_h(T))) ** 2)


@dataclass
class TwinResult:
    times: np.ndarray
    D: np.ndarray
    E: np.ndarray
    C_hat: float
    envelope: np.ndarray
    report: CertificateReport
    final: tuple


def twin_run(s0a: State, s0b: State, p: ModelParams, c: StepperConfig) -> TwinResult:
    """Integrate two trajectories in lockstep and track their separation.

    D(t) = ||phi||^2 + ||psi||^2 with phi = v_a - v_b, psi = T_a - T_b, and
    E(t) is the time integral of :func:`growth_integrand` along run b.  The
    reported C_hat = max_t log(D(t)/D(0)) / E(t) makes D(t) <= D(0) exp(C_hat E(t))
    hold at every sample; it is NaN when D(0) = 0.
    """
    if not s0a.grid.compatible(s0b.grid):
        raise ValueError("twin runs need identical grids")
    if s0a.t != s0b.t:
        raise ValueError("twin runs need identical start times")
    a, b = s0a, s0b
    times, D, g = [a.t], [difference_norm2(a, b)], [growth_integrand(b)]
    eps = 1e-9 * c.dt
    n = 0
    while c.t_end - a.t > eps and n < c.max_steps:
        dt = min(cfl_dt(a, c), cfl_dt(b, c), c.t_end - a.t)
        a = step(a, p, c, dt)
        b = step(b, p, c, dt)
        n += 1
        if n % c.monitor_every == 0 or c.t_end - a.t <= eps:
            times.append(a.t)
            D.append(difference_norm2(a, b))
            g.append(growth_integrand(b))
    times = np.array(times)
    D = np.array(D)
    E = _cumtrapz(times, np.array(g))
    D0 = D[0]
    if D0 > 0:
        ok = (E > 0) & (D > 0)
        C_hat = float(np.max(np.log(D[ok] / D0) / E[ok])) if ok.any() else 0.0
        envelope = D0 * np.exp(C_hat * E)
        passed = bool(np.all(D <= envelope * (1 + 1e-12)))
        emp = C_hat
    else:
        C_hat = math.nan
        envelope = np.zeros_like(D)
        passed = bool(np.all(D == 0))
        emp = 0.0
    report = CertificateReport("twin_run", times, D, envelope, emp, emp, passed)
    return TwinResult(times, D, E, C_hat, envelope, report, (a, b))


__all__ = [
    "DerivedVars", "FunctionalSample", "CertificateReport", "TwinResult",
    "solve_beta", "derived_vars", "sample_functionals", "initial_norms",
    "bound_ladder", "eval_bound", "certify", "certificate", "max_principle_check",
    "twin_run", "minimal_constant", "c_R", "composite_X", "SERIES_COLUMNS", "PAIRINGS",
    "FunctionalMonitor", "reconstruction_ratio", "monitored_series", "growth_integrand",
    "difference_norm2",
]
