"""Command-line entry point: ``pechannel {simulate,twin,ineqlab,snapshot-info}``.

Exit codes: 0 success, 1 a hard assertion or constant-free inequality
failed, 2 configuration or file-format error, 3 blow-up.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .estimates import SERIES_COLUMNS, FunctionalMonitor, certify, initial_norms, twin_run
from .inequalities import run_lab
from .integrator import BlowUpError, run
from .model import ConfigurationError, ModelParams, State
from .profiles import mode_source, perturb, random_state, taylor_mode
from .snapshot import FormatError, read_snapshot, snapshot_info, write_snapshot

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
OUTPUT_ENV = "PECH_OUTPUT_DIR"
CONSTRAINT_RTOL = 1e-10
MAXPRIN_TOL = 1e-5
ENERGY_TOL = 1e-6


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class CsvSink:
    """Row writer that flushes after every row."""

    def __init__(self, path: Path, columns):
        self.columns = list(columns)
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(self.columns)
        self._fh.flush()

    def write(self, row: dict):
        self._w.writerow([_fmt(row[c]) for c in self.columns])
        self._fh.flush()

    def close(self):
        self._fh.close()


def output_dir(cfg: RunConfig) -> Path:
    out = Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_problem(cfg: RunConfig) -> tuple[State, ModelParams]:
    grid = cfg.grid()
    if cfg.init_profile == "zero":
        s0 = taylor_mode(grid, 0.0, 0.0)
    elif cfg.init_profile == "taylor-mode":
        s0 = taylor_mode(grid, cfg.init_amplitude_v, cfg.init_amplitude_T,
                         cfg.init_mode_x, cfg.init_mode_y, cfg.init_mode_z)
    elif cfg.init_profile == "random":
        s0 = random_state(grid, cfg.init_amplitude_v, cfg.init_amplitude_T, cfg.seed,
                          cfg.init_band_limit)
    else:
        s0 = read_snapshot(cfg.init_path, grid)
    if cfg.Q_profile == "zero":
        Q = None
    elif cfg.Q_profile == "mode":
        Q = mode_source(grid, cfg.Q_amplitude, cfg.Q_mode_x, cfg.Q_mode_y, cfg.Q_mode_z)
    else:
        Q = read_snapshot(cfg.Q_path, grid).T
    p = ModelParams(R1=cfg.R1, R2=cfg.R2, R3=cfg.R3, f0=cfg.f0, h=cfg.h, Q=Q)
    return s0, p


def _prepare(args) -> tuple[RunConfig, Path]:
    cfg = parse_config(args.config)
    out = output_dir(cfg)
    (out / "config.echo").write_text(cfg.echo())
    return cfg, out


def cmd_simulate(args) -> int:
    cfg, out = _prepare(args)
    s0, p = build_problem(cfg)
    norms = initial_norms(s0, p)
    monitor = FunctionalMonitor(p, norms["T0_inf"])
    sink = CsvSink(out / "series.csv", SERIES_COLUMNS)
    if cfg.output_snapshots:
        write_snapshot(s0, out / "initial.pech")
    try:
        result = run(s0, p, cfg.stepper(), monitor, on_sample=sink.write)
    except BlowUpError as err:
        sink.close()
        print(f"blow-up: {err}; partial series written to {out / 'series.csv'}",
              file=sys.stderr)
        return EXIT_BLOWUP
    sink.close()
    if cfg.output_snapshots:
        write_snapshot(result.state, out / "final.pech")
    series = result.series or [monitor(s0)]

    reports = certify(series, p, norms, cfg.C)
    with open(out / "certificates.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "empirical_C", "C", "pass", "max_monitored", "final_bound"])
        for r in reports:
            w.writerow([r.name, _fmt(float(r.empirical_C)), _fmt(float(r.C)), _fmt(r.passed),
                        _fmt(float(r.monitored.max())), _fmt(float(r.bound[-1]))])
    for r in reports:
        print(f"{r.name:18s} empirical_C={float(r.empirical_C):.6g}  "
              f"{'pass' if r.passed else 'FAIL'}")

    failures = hard_assertions(series, s0)
    for msg in failures:
        print(f"assertion failed: {msg}", file=sys.stderr)
    return EXIT_ASSERT if failures else EXIT_OK


def hard_assertions(series: list[dict], s0: State) -> list[str]:
    """Constraint, maximum principle and energy inequality at every sample."""
    scale = max((r["norm_v_L2"] for r in series), default=0.0)
    vmax = max(scale, 1.0)
    out = []
    for r in series:
        if r["div_vbar_inf"] > CONSTRAINT_RTOL * vmax:
            out.append(f"constraint violated at t={r['t']!r}: div_vbar_inf={r['div_vbar_inf']!r}")
        if not r["maxprin_margin"] >= -MAXPRIN_TOL:
            out.append(f"maximum principle violated at t={r['t']!r}: "
                       f"margin={r['maxprin_margin']!r}")
        if not r["energy_margin"] >= -ENERGY_TOL:
            out.append(f"energy inequality violated at t={r['t']!r}: "
                       f"margin={r['energy_margin']!r}")
    return out


def cmd_twin(args) -> int:
    cfg, out = _prepare(args)
    s0, p = build_problem(cfg)
    spec = args.perturb
    if spec.startswith("snapshot:"):
        try:
            sb = read_snapshot(spec[len("snapshot:"):], cfg.grid())
        except FormatError as err:
            raise ConfigurationError(f"twin perturbation: {err}") from None
        sb = sb.replace(t=s0.t)
    else:
        sb = perturb(s0, spec)
    try:
        res = twin_run(s0, sb, p, cfg.stepper())
    except BlowUpError as err:
        print(f"blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    with open(out / "twin.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "D", "E", "envelope"])
        for row in zip(res.times, res.D, res.E, res.envelope):
            w.writerow([_fmt(float(x)) for x in row])
    print(f"twin: D0={float(res.D[0])!r}  C_hat={res.C_hat!r}  "
          f"{'pass' if res.report.passed else 'FAIL'}")
    return EXIT_OK if res.report.passed else EXIT_ASSERT


def cmd_ineqlab(args) -> int:
    cfg, out = _prepare(args)
    results = run_lab(samples=cfg.ineq_samples, band_limit=cfg.ineq_band_limit,
                      resolution=cfg.ineq_resolution, seed=cfg.seed, h=cfg.h)
    with open(out / "inequalities.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "samples", "empirical_C", "drift", "constant_free", "failures",
                    "pass"])
        for r in results:
            w.writerow([r.name, r.samples, _fmt(r.empirical_C), _fmt(r.drift),
                        _fmt(r.constant_free), r.failures, _fmt(r.passed)])
    bad = [r for r in results if r.constant_free and r.failures]
    for r in results:
        tag = "pass" if r.passed else "FAIL"
        print(f"{r.name:22s} C={r.empirical_C:.6g} drift={r.drift:.4f} {tag}")
    return EXIT_ASSERT if bad else EXIT_OK


def cmd_snapshot_info(args) -> int:
    print(snapshot_info(args.path))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pechannel", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("simulate", help="integrate, monitor and certify one run")
    sp.add_argument("config")
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("twin", help="run a perturbed twin and track the separation")
    sp.add_argument("config")
    sp.add_argument("--perturb", required=True,
                    help="field:amp[:mx,my,mz] with field in v1, v2, T, or snapshot:PATH")
    sp.set_defaults(func=cmd_twin)
    sp = sub.add_parser("ineqlab", help="randomized inequality sweep")
    sp.add_argument("config")
    sp.set_defaults(func=cmd_ineqlab)
    sp = sub.add_parser("snapshot-info", help="print a snapshot header")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_snapshot_info)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FormatError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

