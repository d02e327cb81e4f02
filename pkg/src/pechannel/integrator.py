"""IMEX time stepping in modal space.

The linear operators L1 and L2 are diagonal in the Fourier x cosine/sine
basis, so the implicit solve is a per-mode division.  Advection, Coriolis,
buoyancy and sources are explicit (forward Euler or variable-step AB2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .calculus import COS, SIN, VectorFieldH, from_spectral, norm_Lq, to_spectral
from .model import ConfigurationError, ModelParams, State, barotropic_project, tendency

SCHEMES = ("imex_euler", "imex_cnab2")


class BlowUpError(RuntimeError):
    """Non-finite or overflow-scale values appeared; ``t`` is the time of the offending step."""

    def __init__(self, t: float, partial=None):
        super().__init__(f"non-finite field values at t = {t!r}")
        self.t = t
        self.partial = partial


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "imex_cnab2"
    cfl_target: float | None = None
    max_steps: int = 10_000_000
    monitor_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("stepper.dt must be > 0")
        if self.t_end < 0:
            raise ConfigurationError("stepper.t_end must be >= 0")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"stepper.scheme must be one of {SCHEMES}")
        if self.cfl_target is not None and not 0 < self.cfl_target < 1:
            raise ConfigurationError("stepper.cfl_target must lie in (0, 1)")
        if self.max_steps < 1:
            raise ConfigurationError("stepper.max_steps must be >= 1")
        if self.monitor_every < 1:
            raise ConfigurationError("monitor.every must be >= 1")


def _explicit_modal(s: State, p: ModelParams):
    tend = tendency(s, p)
    return (to_spectral(tend.dv_explicit.u1), to_spectral(tend.dv_explicit.u2),
            to_spectral(tend.dT_explicit))


def _eigenvalues(grid, p: ModelParams):
    kz2 = grid.kz[None, None, :] ** 2
    lam_v = grid.k2[:, :, None] / p.R1 + kz2 / p.R2
    lam_T = np.broadcast_to(kz2 / p.R3, grid.spectral_shape)
    return lam_v, lam_T


# beyond this magnitude sixth powers in the monitors overflow
BLOWUP_THRESHOLD = 1e50


def _finite(*arrays) -> bool:
    return all(np.isfinite(a).all() and np.abs(a).max(initial=0.0) < BLOWUP_THRESHOLD
               for a in arrays)


def step(s: State, p: ModelParams, c: StepperConfig, dt: float | None = None) -> State:
    """Advance one IMEX step and re-impose the barotropic constraint.

    imex_euler:  (1 + dt L) X1 = X0 + dt N0
    imex_cnab2:  (1 + dt L / 2) X1 = (1 - dt L / 2) X0 + dt (AB2 extrapolant)

    AB2 uses the explicit tendency stored in ``s.history``; without one the
    step falls back to imex_euler.
    """
    dt = c.dt if dt is None else dt
    if not dt > 0:
        raise ConfigurationError("stepper.dt must be > 0")
    grid = s.grid
    p.check_grid(grid)
    N = _explicit_modal(s, p)
    X = (to_spectral(s.v.u1), to_spectral(s.v.u2), to_spectral(s.T))
    lam_v, lam_T = _eigenvalues(grid, p)
    lams = (lam_v, lam_v, lam_T)

    if c.scheme == "imex_cnab2" and s.history is not None:
        N_old, dt_old = s.history
        r = dt / dt_old
        ext = [(1 + 0.5 * r) * n - 0.5 * r * n_old for n, n_old in zip(N, N_old)]
        new = [((1 - 0.5 * dt * lam) * x + dt * e) / (1 + 0.5 * dt * lam)
               for x, e, lam in zip(X, ext, lams)]
    else:
        new = [(x + dt * n) / (1 + dt * lam) for x, n, lam in zip(X, N, lams)]

    new = [a * grid.mask for a in new]
    t_new = s.t + dt
    if not _finite(*new):
        raise BlowUpError(t_new)
    if p.freeze_velocity:
        v = s.v
    else:
        v = barotropic_project(VectorFieldH(from_spectral(grid, new[0], COS),
                                            from_spectral(grid, new[1], COS)))
    T = from_spectral(grid, new[2], SIN)
    if not _finite(v.u1.values, v.u2.values, T.values):
        raise BlowUpError(t_new)
    return State(t=t_new, v=v, T=T, history=(N, dt))


def cfl_dt(s: State, c: StepperConfig) -> float:
    """Largest step allowed by cfl_target, capped at c.dt."""
    if c.cfl_target is None:
        return c.dt
    grid = s.grid
    vmax = norm_Lq(s.v, math.inf)
    wmax = norm_Lq(s.w, math.inf)
    limits = [c.dt]
    if vmax > 0:
        limits.append(c.cfl_target * min(grid.dx, grid.dy) / vmax)
    if wmax > 0:
        limits.append(c.cfl_target * grid.dz / wmax)
    return min(limits)


Monitor = Callable[[State], dict]


@dataclass
class RunResult:
    state: State
    series: list[dict] = field(default_factory=list)
    steps: int = 0
    truncated: bool = False
    dts: list[float] = field(default_factory=list)


def _sample(monitors: Iterable[Monitor], s: State) -> dict:
    row = {"t": s.t}
    for mon in monitors:
        row.update(mon(s))
    return row


def run(s0: State, p: ModelParams, c: StepperConfig,
        monitors: Monitor | Iterable[Monitor] | None = None,
        on_sample: Callable[[dict], None] | None = None) -> RunResult:
    """Integrate from s0 to c.t_end, sampling monitors every c.monitor_every steps.

    The initial state is sampled when at least one step is taken, and the
    final state is always sampled.  ``on_sample`` sees each row as soon as it
    is produced (used for incremental output).  A BlowUpError carries the
    partial RunResult in its ``partial`` attribute.
    """
    if monitors is None:
        monitors = []
    elif callable(monitors):
        monitors = [monitors]
    monitors = list(monitors)
    result = RunResult(state=s0)
    s = s0
    eps = 1e-9 * c.dt

    def record(state):
        row = _sample(monitors, state)
        result.series.append(row)
        if on_sample is not None:
            on_sample(row)

    if c.t_end - s.t <= eps:
        return result
    record(s)
    n = 0
    while c.t_end - s.t > eps:
        if n >= c.max_steps:
            result.truncated = True
            break
        dt = min(cfl_dt(s, c), c.t_end - s.t)
        try:
            s = step(s, p, c, dt)
        except BlowUpError as err:
            result.state = s
            result.steps = n
            err.partial = result
            raise
        n += 1
        result.dts.append(dt)
        done = c.t_end - s.t <= eps
        if n % c.monitor_every == 0 or done:
            record(s)
    if result.series and result.series[-1]["t"] != s.t:
        record(s)
    result.state = s
    result.steps = n
    return result
