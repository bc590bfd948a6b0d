"""Binary snapshots (``.fpk``) and the text artifacts written by a run."""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .diagnostics import REPORT_HEADER, PropertyReport, RunHistory
from .errors import BadMagic, TruncatedFile, VersionMismatch
from .evolution import SERIES_COLUMNS
from .grid import Grid, check_field, make_grid

MAGIC = b"FPK1"


def emit_snapshot(grid: Grid, values: np.ndarray, t: float, path) -> None:
    """Write ``FPK1 | u32 n | n*u32 sizes | f64 t | values`` (all little-endian)."""
    values = check_field(grid, values)
    header = MAGIC + struct.pack(f"<I{grid.n}Id", grid.n, *grid.sizes, float(t))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def load_snapshot(path) -> tuple[Grid, np.ndarray, float]:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise TruncatedFile(f"{path}: {len(data)} bytes is too short for a header")
    magic = data[:4]
    if magic != MAGIC:
        if magic[:3] == MAGIC[:3]:
            raise VersionMismatch(f"{path}: snapshot version {magic[3:4]!r}, expected b'1'")
        raise BadMagic(f"{path}: bad magic {magic!r}")
    (n,) = struct.unpack_from("<I", data, 4)
    head = 8 + 4 * n + 8
    if n == 0 or len(data) < head:
        raise TruncatedFile(f"{path}: header declares n = {n} but file is {len(data)} bytes")
    sizes = struct.unpack_from(f"<{n}I", data, 8)
    (t,) = struct.unpack_from("<d", data, 8 + 4 * n)
    count = int(np.prod(sizes, dtype=np.int64))
    if len(data) != head + 8 * count:
        raise TruncatedFile(f"{path}: expected {head + 8 * count} bytes for sizes {sizes}, got {len(data)}")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=head).astype(float).reshape(sizes)
    return make_grid(n, sizes), values, t


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series(h: RunHistory, path) -> None:
    lines = [",".join(SERIES_COLUMNS)]
    for rec in h.records:
        lines.append(",".join(_fmt(rec[c]) for c in SERIES_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def write_reports(reports: list[PropertyReport], path) -> None:
    Path(path).write_text("\n".join([REPORT_HEADER, *(r.csv_row() for r in reports)]) + "\n")


def write_plot_data(h: RunHistory, directory) -> list[Path]:
    """One two-column ``t value`` file per series column."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for col in SERIES_COLUMNS[1:]:
        p = directory / f"{col}.dat"
        rows = [f"# t {col}"] + [f"{_fmt(r['t'])} {_fmt(r[col])}" for r in h.records]
        p.write_text("\n".join(rows) + "\n")
        out.append(p)
    return out


def write_snapshots(h: RunHistory, grid: Grid, directory) -> list[Path]:
    out = []
    for step, t, values in h.snapshots:
        p = Path(directory) / f"snapshot_{step}.fpk"
        emit_snapshot(grid, values, t, p)
        out.append(p)
    return out


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
