"""Field files and CSV tables.

Field file layout (all little-endian):
    bytes 0-7    magic b"AFNLSFLD"
    bytes 8-11   uint32 format version
    bytes 12-15  reserved (zero)
    then nx, ny as int64, lx, ly as float64,
    then nx*ny complex samples as interleaved (re, im) float64, row-major in (x, y).
"""
import csv
import struct

import numpy as np

from .spectral import GridSpec

MAGIC = b"AFNLSFLD"
VERSION = 1
_HEAD = struct.Struct("<8sII")
_META = struct.Struct("<qqdd")


def write_field(path, u, grid):
    u = np.ascontiguousarray(u, dtype="<c16")
    if u.shape != grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, 0))
        fh.write(_META.pack(grid.nx, grid.ny, grid.lx, grid.ly))
        fh.write(u.tobytes(order="C"))


def read_field(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEAD.size + _META.size:
        raise ValueError("truncated field file")
    magic, version, _ = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError("not a field file")
    if version != VERSION:
        raise ValueError(f"unsupported field file version {version}")
    nx, ny, lx, ly = _META.unpack_from(raw, _HEAD.size)
    grid = GridSpec(nx, ny, lx, ly)
    off = _HEAD.size + _META.size
    if len(raw) - off != 16 * nx * ny:
        raise ValueError("field file size does not match its header")
    u = np.frombuffer(raw, dtype="<c16", offset=off).reshape(nx, ny).astype(complex)
    return u, grid


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows):
    """Header row then data; floats as repr so values round-trip exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


DIAG_COLUMNS = ["t", "mass", "energy", "q", "momentum", "hdot", "lp", "virial"]


def trajectory_rows(traj):
    return [[getattr(d, k) for k in DIAG_COLUMNS] for d in traj.diagnostics]
