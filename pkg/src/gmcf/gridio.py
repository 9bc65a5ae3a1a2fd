"""Binary grid dumps.

Layout (all little-endian):

    bytes 0..3   magic "GMCF"
    u32          format version (currently 1)
    u8           dim (1, 2, or 3)
    u64 * dim    extents (nodes per axis)
    f64          spacing (uniform, shared by all axes)
    f64 * dim    origin (coordinates of node [0,...,0])
    f64 * prod   node values, row-major (C order)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"GMCF"
VERSION = 1


@dataclass
class GridDump:
    values: np.ndarray
    spacing: float
    origin: np.ndarray

    @property
    def dim(self):
        return self.values.ndim


def write_grid(path, values, spacing, origin):
    values = np.asarray(values, dtype="<f8")
    origin = np.asarray(origin, dtype="<f8").ravel()
    dim = values.ndim
    if dim not in (1, 2, 3):
        raise ValueError("grid dumps support dim 1..3, got %d" % dim)
    if origin.size != dim:
        raise ValueError("origin length %d does not match dim %d" % (origin.size, dim))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<B", dim))
        fh.write(struct.pack("<%dQ" % dim, *values.shape))
        fh.write(struct.pack("<d", float(spacing)))
        fh.write(struct.pack("<%dd" % dim, *origin))
        fh.write(values.tobytes(order="C"))


def read_grid(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ValueError("not a grid dump: bad magic %r" % raw[:4])
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != VERSION:
        raise ValueError("unsupported grid dump version %d" % version)
    (dim,) = struct.unpack_from("<B", raw, 8)
    if dim not in (1, 2, 3):
        raise ValueError("bad dim %d" % dim)
    off = 9
    extents = struct.unpack_from("<%dQ" % dim, raw, off)
    off += 8 * dim
    (spacing,) = struct.unpack_from("<d", raw, off)
    off += 8
    origin = np.array(struct.unpack_from("<%dd" % dim, raw, off))
    off += 8 * dim
    count = int(np.prod(extents))
    expected = off + 8 * count
    if len(raw) < expected:
        raise ValueError("truncated grid dump: %d bytes, expected %d" % (len(raw), expected))
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(extents).copy()
    return GridDump(values=values, spacing=spacing, origin=origin)
