"""Binary grid-field container format.

A ``.wcg`` file stores one or more named C-order arrays sampled on uniform
axes.  Layout (all integers little-endian unsigned 64-bit, text UTF-8):

    magic     b"WCGRID1\\n"
    n_fields  u64
    per field:
        name_len u64, name bytes
        dtype_len u64, dtype string (numpy str, e.g. "<f8", "<c16")
        ndim     u64
        per axis: size u64, origin f64, spacing f64
        payload  size-prod * itemsize bytes, C order

Axes are reconstructed as origin + spacing * arange(size); fields in one
file may have different shapes (e.g. a distance field plus a mask).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

__all__ = ["GridField", "write_grid", "read_grid", "MAGIC"]

MAGIC = b"WCGRID1\n"
_U64 = struct.Struct("<Q")
_F64 = struct.Struct("<d")


@dataclass(frozen=True)
class GridField:
    """One named array with its uniform axes."""

    name: str
    axes: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != tuple(len(ax) for ax in self.axes):
            raise ValueError(
                f"field {self.name!r}: shape {self.values.shape} does not match axes"
            )


def _axis_params(ax: np.ndarray) -> tuple[int, float, float]:
    ax = np.asarray(ax, dtype=float)
    if ax.size < 2:
        raise ValueError("axes need at least 2 nodes")
    spacing = float(ax[1] - ax[0])
    if not np.allclose(np.diff(ax), spacing, rtol=1e-9, atol=0.0):
        raise ValueError("axes must be uniformly spaced")
    return len(ax), float(ax[0]), spacing


def write_grid(path: str | Path, fields: Mapping[str, tuple] | list[GridField]) -> None:
    """Write named grid fields; accepts GridField list or {name: (axes, values)}."""
    if isinstance(fields, Mapping):
        items = [GridField(name, tuple(np.asarray(a, dtype=float) for a in axes), np.asarray(vals))
                 for name, (axes, vals) in fields.items()]
    else:
        items = list(fields)
    buf = bytearray()
    buf += MAGIC
    buf += _U64.pack(len(items))
    for f in items:
        name_b = f.name.encode("utf-8")
        vals = np.ascontiguousarray(f.values)
        dtype_b = vals.dtype.str.encode("ascii")
        buf += _U64.pack(len(name_b)) + name_b
        buf += _U64.pack(len(dtype_b)) + dtype_b
        buf += _U64.pack(vals.ndim)
        for ax in f.axes:
            size, origin, spacing = _axis_params(ax)
            buf += _U64.pack(size) + _F64.pack(origin) + _F64.pack(spacing)
        buf += vals.tobytes(order="C")
    Path(path).write_bytes(bytes(buf))


def read_grid(path: str | Path) -> dict[str, GridField]:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a grid container (bad magic)")
    pos = len(MAGIC)

    def u64() -> int:
        nonlocal pos
        (v,) = _U64.unpack_from(raw, pos)
        pos += 8
        return v

    def f64() -> float:
        nonlocal pos
        (v,) = _F64.unpack_from(raw, pos)
        pos += 8
        return v

    out: dict[str, GridField] = {}
    n_fields = u64()
    for _ in range(n_fields):
        nlen = u64()
        name = raw[pos : pos + nlen].decode("utf-8")
        pos += nlen
        dlen = u64()
        dtype = np.dtype(raw[pos : pos + dlen].decode("ascii"))
        pos += dlen
        ndim = u64()
        axes = []
        shape = []
        for _ in range(ndim):
            size = u64()
            origin = f64()
            spacing = f64()
            axes.append(origin + spacing * np.arange(size))
            shape.append(size)
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * dtype.itemsize
        vals = np.frombuffer(raw, dtype=dtype, count=count, offset=pos).reshape(shape).copy()
        pos += nbytes
        out[name] = GridField(name=name, axes=tuple(axes), values=vals)
    return out
