"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .calculus import GridSpec
from .integrator import SCHEMES, StepperConfig
from .model import ConfigurationError

INIT_PROFILES = ("zero", "taylor-mode", "random", "snapshot")
Q_PROFILES = ("zero", "mode", "snapshot")

# key -> (type, default); a default of REQUIRED marks a mandatory key
REQUIRED = object()
SCHEMA = {
    "grid.nx": (int, REQUIRED),
    "grid.ny": (int, REQUIRED),
    "grid.nz": (int, REQUIRED),
    "grid.h": (float, 1.0),
    "grid.dealias": (bool, True),
    "params.R1": (float, REQUIRED),
    "params.R2": (float, REQUIRED),
    "params.R3": (float, REQUIRED),
    "params.f0": (float, 0.0),
    "stepper.scheme": (str, "imex_cnab2"),
    "stepper.dt": (float, REQUIRED),
    "stepper.t_end": (float, REQUIRED),
    "stepper.cfl_target": (float, None),
    "stepper.max_steps": (int, 10_000_000),
    "init.profile": (str, "zero"),
    "init.amplitude_v": (float, 0.1),
    "init.amplitude_T": (float, 0.1),
    "init.mode_x": (int, 1),
    "init.mode_y": (int, 1),
    "init.mode_z": (int, 1),
    "init.band_limit": (int, 3),
    "init.path": (str, None),
    "Q.profile": (str, "zero"),
    "Q.amplitude": (float, 0.0),
    "Q.mode_x": (int, 1),
    "Q.mode_y": (int, 0),
    "Q.mode_z": (int, 1),
    "Q.path": (str, None),
    "monitor.every": (int, 1),
    "certificate.C": (float, 1.0),
    "output.dir": (str, "out"),
    "output.snapshots": (bool, True),
    "rng.seed": (int, 0),
    "ineq.samples": (int, 100),
    "ineq.band_limit": (int, 8),
    "ineq.resolution": (int, 16),
}


@dataclass(frozen=True)
class RunConfig:
    nx: int
    ny: int
    nz: int
    h: float
    dealias: bool
    R1: float
    R2: float
    R3: float
    f0: float
    scheme: str
    dt: float
    t_end: float
    cfl_target: float | None
    max_steps: int
    init_profile: str
    init_amplitude_v: float
    init_amplitude_T: float
    init_mode_x: int
    init_mode_y: int
    init_mode_z: int
    init_band_limit: int
    init_path: str | None
    Q_profile: str
    Q_amplitude: float
    Q_mode_x: int
    Q_mode_y: int
    Q_mode_z: int
    Q_path: str | None
    monitor_every: int
    C: float
    output_dir: str
    output_snapshots: bool
    seed: int
    ineq_samples: int
    ineq_band_limit: int
    ineq_resolution: int
    source: dict

    def grid(self) -> GridSpec:
        return GridSpec(self.nx, self.ny, self.nz, self.h, self.dealias)

    def stepper(self) -> StepperConfig:
        return StepperConfig(dt=self.dt, t_end=self.t_end, scheme=self.scheme,
                             cfl_target=self.cfl_target, max_steps=self.max_steps,
                             monitor_every=self.monitor_every)

    def echo(self) -> str:
        """Canonical text form of the parsed configuration (all keys, sorted)."""
        lines = []
        for key in sorted(self.source):
            val = self.source[key]
            if val is None:
                continue
            if isinstance(val, bool):
                text = "true" if val else "false"
            elif isinstance(val, float):
                text = repr(val)
            else:
                text = str(val)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


_ATTR = {
    "grid.nx": "nx", "grid.ny": "ny", "grid.nz": "nz", "grid.h": "h", "grid.dealias": "dealias",
    "params.R1": "R1", "params.R2": "R2", "params.R3": "R3", "params.f0": "f0",
    "stepper.scheme": "scheme", "stepper.dt": "dt", "stepper.t_end": "t_end",
    "stepper.cfl_target": "cfl_target", "stepper.max_steps": "max_steps",
    "monitor.every": "monitor_every", "certificate.C": "C", "output.dir": "output_dir",
    "output.snapshots": "output_snapshots", "rng.seed": "seed",
}


def _attr(key: str) -> str:
    return _ATTR.get(key, key.replace(".", "_"))


def _convert(key: str, raw: str, typ, lineno: int | None):
    where = f" (line {lineno})" if lineno is not None else ""
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigurationError(
            f"{key} expects {typ.__name__}, got {raw!r}{where}") from None


def parse_config_text(text: str) -> RunConfig:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, SCHEMA[key][0], lineno)
    for key, (_, default) in SCHEMA.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigurationError(f"missing required key {key}")
            values[key] = default
    cfg = RunConfig(**{_attr(k): v for k, v in values.items()}, source=values)
    validate(cfg)
    return cfg


def parse_config(path) -> RunConfig:
    return parse_config_text(Path(path).read_text())


def validate(cfg: RunConfig):
    """Re-check every positivity and choice constraint, naming the key."""
    def positive(key, val):
        if not (isinstance(val, (int, float)) and val > 0 and math.isfinite(val)):
            raise ConfigurationError(f"{key} must be > 0")

    for key in ("params.R1", "params.R2", "params.R3", "grid.h", "stepper.dt",
                "monitor.every", "ineq.samples", "stepper.max_steps"):
        positive(key, cfg.source[key])
    if not cfg.t_end >= 0:
        raise ConfigurationError("stepper.t_end must be >= 0")
    if not math.isfinite(cfg.f0):
        raise ConfigurationError("params.f0 must be finite")
    if cfg.scheme not in SCHEMES:
        raise ConfigurationError(f"stepper.scheme must be one of {', '.join(SCHEMES)}")
    if cfg.cfl_target is not None and not 0 < cfg.cfl_target < 1:
        raise ConfigurationError("stepper.cfl_target must lie in (0, 1)")
    if cfg.init_profile not in INIT_PROFILES:
        raise ConfigurationError(f"init.profile must be one of {', '.join(INIT_PROFILES)}")
    if cfg.init_profile == "snapshot" and not cfg.init_path:
        raise ConfigurationError("init.path is required when init.profile = snapshot")
    if cfg.Q_profile not in Q_PROFILES:
        raise ConfigurationError(f"Q.profile must be one of {', '.join(Q_PROFILES)}")
    if cfg.Q_profile == "snapshot" and not cfg.Q_path:
        raise ConfigurationError("Q.path is required when Q.profile = snapshot")
    if cfg.Q_profile == "mode" and cfg.Q_mode_z < 1:
        raise ConfigurationError("Q.mode_z must be >= 1")
    if cfg.C < 0:
        raise ConfigurationError("certificate.C must be >= 0")
    if cfg.init_band_limit < 0 or cfg.ineq_band_limit < 0:
        raise ConfigurationError("band limits must be >= 0")
    try:
        cfg.grid()
    except ValueError as err:
        raise ConfigurationError(str(err)) from None


__all__ = ["RunConfig", "parse_config", "parse_config_text", "validate", "SCHEMA"]
