"""Binary snapshots and CSV logs.

Snapshot layout (little-endian regardless of host)::

    b"CHEV1" | version u32 | nx u32 | ny u32 | Lx f64 | Ly f64 | t f64
    phi: nx*ny f64, row-major over (i, j) with j fastest
    A:   nx*ny (re f64, im f64) pairs, same order
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from chevron.core import Grid2D, SimState

MAGIC = b"CHEV1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<5sIIIddd")


class SnapshotError(ValueError):
    pass


class CsvFormatError(ValueError):
    pass


def encode_snapshot(state: SimState) -> bytes:
    g = state.grid
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, g.nx, g.ny, g.Lx, g.Ly, state.t)
    phi = np.ascontiguousarray(state.phi.values, dtype="<f8")
    A = np.ascontiguousarray(state.A.values, dtype="<c16")
    return header + phi.tobytes() + A.tobytes()


def decode_snapshot(data: bytes) -> SimState:
    if len(data) < _HEADER.size:
        raise SnapshotError("snapshot truncated inside header")
    magic, version, nx, ny, Lx, Ly, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    n = nx * ny
    expected = _HEADER.size + 8 * n + 16 * n
    if len(data) != expected:
        raise SnapshotError(f"snapshot has {len(data)} bytes, expected {expected}")
    grid = Grid2D(nx, ny, Lx, Ly)
    off = _HEADER.size
    phi = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(nx, ny)
    A = np.frombuffer(data, dtype="<c16", count=n, offset=off + 8 * n).reshape(nx, ny)
    return SimState.from_arrays(grid, A.astype(np.complex128), phi.astype(np.float64), t)


def write_snapshot(path, state: SimState) -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(state))
    return path


def read_snapshot(path) -> SimState:
    return decode_snapshot(Path(path).read_bytes())


def snapshot_name(t: float) -> str:
    return f"snapshot_{t:.6f}.chev"


def fmt(value) -> str:
    """17 significant digits: lossless for f64."""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_numeric_csv(path, header: Sequence[str]) -> list[list[float]]:
    """Rows of floats from a CSV whose first line must equal ``header``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected header {','.join(header)}") from None
        if [c.strip() for c in first] != list(header):
            raise CsvFormatError(f"{path}:1: header {first} does not match {list(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
            if any(math.isinf(v) for v in values):
                raise CsvFormatError(f"{path}:{lineno}: infinite value")
            rows.append(values)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return rows
