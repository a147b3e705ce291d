"""Binary field snapshot format.

Layout (little endian):

    magic   4 bytes  b"BSSF"
    version u32      currently 1
    d       u32
    n       d * u32  points per axis
    L       d * f64  box side per axis
    repr    u32      0 = physical, 1 = frequency
    data    2 * prod(n) * f64, interleaved (re, im), row-major
"""

from __future__ import annotations

import struct

import numpy as np

from .grids import FREQUENCY, PHYSICAL, GridSpec, SpectralField

MAGIC = b"BSSF"
VERSION = 1


def write_snapshot(path, f: SpectralField):
    grid = f.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, grid.d))
        fh.write(struct.pack(f"<{grid.d}I", *grid.n))
        fh.write(struct.pack(f"<{grid.d}d", *grid.L))
        fh.write(struct.pack("<I", 0 if f.representation == PHYSICAL else 1))
        interleaved = np.empty(f.values.size * 2, dtype="<f8")
        flat = f.values.reshape(-1)
        interleaved[0::2] = flat.real
        interleaved[1::2] = flat.imag
        fh.write(interleaved.tobytes())


def read_snapshot(path) -> SpectralField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, d = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        n = struct.unpack(f"<{d}I", fh.read(4 * d))
        L = struct.unpack(f"<{d}d", fh.read(8 * d))
        (flag,) = struct.unpack("<I", fh.read(4))
        grid = GridSpec(d, n, L)
        count = 2 * int(np.prod(n))
        raw = np.frombuffer(fh.read(count * 8), dtype="<f8")
        if raw.size != count:
            raise ValueError("snapshot data truncated")
    values = (raw[0::2] + 1j * raw[1::2]).reshape(n)
    return SpectralField(grid, values, PHYSICAL if flag == 0 else FREQUENCY)
