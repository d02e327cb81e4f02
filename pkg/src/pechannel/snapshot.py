"""Binary field snapshots.

Layout (all little-endian): magic ``PECH``, u32 version, u32 nx, ny, nz,
f64 h, f64 t, then v1, v2 and T as f64 arrays with x varying fastest,
then y, then z.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calculus import COS, SIN, GridSpec, ScalarField3, VectorFieldH
from .model import State

MAGIC = b"PECH"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIdd")


class FormatError(ValueError):
    """Malformed or incompatible snapshot file."""


@dataclass(frozen=True)
class SnapshotHeader:
    version: int
    nx: int
    ny: int
    nz: int
    h: float
    t: float


def _encode(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a.ravel(order="F"), dtype="<f8").tobytes()


def write_snapshot(state: State, path) -> None:
    g = state.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.nz, float(g.h), float(state.t)))
        for arr in (state.v.u1.values, state.v.u2.values, state.T.values):
            fh.write(_encode(arr))


def read_header(path) -> SnapshotHeader:
    data = Path(path).read_bytes()
    return _parse_header(data)


def _parse_header(data: bytes) -> SnapshotHeader:
    if len(data) < _HEADER.size:
        raise FormatError("snapshot truncated: incomplete header")
    magic, version, nx, ny, nz, h, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported snapshot version {version} (this reader handles {VERSION})")
    return SnapshotHeader(version, nx, ny, nz, h, t)


def read_snapshot(path, grid: GridSpec | None = None) -> State:
    """Read a snapshot; if ``grid`` is given its dimensions and depth must match."""
    data = Path(path).read_bytes()
    hdr = _parse_header(data)
    n = hdr.nx * hdr.ny * hdr.nz
    expected = _HEADER.size + 3 * 8 * n
    if len(data) < expected:
        raise FormatError(f"snapshot truncated: {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise FormatError(f"snapshot has {len(data) - expected} trailing bytes")
    if grid is None:
        try:
            grid = GridSpec(hdr.nx, hdr.ny, hdr.nz, hdr.h)
        except ValueError as err:
            raise FormatError(f"invalid snapshot dimensions: {err}") from None
    elif (grid.nx, grid.ny, grid.nz) != (hdr.nx, hdr.ny, hdr.nz) or grid.h != hdr.h:
        raise FormatError(
            f"snapshot grid {hdr.nx}x{hdr.ny}x{hdr.nz}, h={hdr.h} does not match "
            f"{grid.nx}x{grid.ny}x{grid.nz}, h={grid.h}")
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size, count=3 * n)
    arrs = [flat[i * n:(i + 1) * n].reshape(grid.shape, order="F").astype(float)
            for i in range(3)]
    v = VectorFieldH(ScalarField3(grid, arrs[0], COS), ScalarField3(grid, arrs[1], COS))
    return State(t=hdr.t, v=v, T=ScalarField3(grid, arrs[2], SIN))


def snapshot_info(path) -> str:
    hdr = read_header(path)
    return (f"PECH v{hdr.version}  nx={hdr.nx} ny={hdr.ny} nz={hdr.nz}  "
            f"h={hdr.h!r}  t={hdr.t!r}")
