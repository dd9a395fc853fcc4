"""Binary snapshot files.

Layout: ``b"PHWF1"``, a little-endian u64 header length, a UTF-8 JSON header,
then the payload of complex128 little-endian values in index order
``[ix][iy][iz][row][col]``.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import BadMagic, HeaderError, PayloadLengthMismatch, TruncatedSnapshot
from .field import GridSpec, PhotonField, PhysicsConfig

MAGIC = b"PHWF1"
_LEN = struct.Struct("<Q")
_DTYPE = np.dtype("<c16")


def atomic_write_bytes(path, data: bytes):
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode(psi: PhotonField) -> bytes:
    header = {
        "grid": psi.grid.to_dict(),
        "time": psi.time,
        "physics": psi.physics.to_dict(),
        "endianness": "little",
        "layout": "ix,iy,iz,row,col",
        "dtype": "complex128",
    }
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(psi.values, dtype=_DTYPE).tobytes()
    return MAGIC + _LEN.pack(len(hb)) + hb + payload


def decode(data: bytes) -> PhotonField:
    if data[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"bad magic: expected {MAGIC!r}, found {data[:len(MAGIC)]!r}")
    pos = len(MAGIC)
    if len(data) < pos + _LEN.size:
        raise TruncatedSnapshot("file ends inside the header length field")
    (hlen,) = _LEN.unpack_from(data, pos)
    pos += _LEN.size
    if len(data) < pos + hlen:
        raise TruncatedSnapshot("file ends inside the JSON header")
    try:
        header = json.loads(data[pos : pos + hlen].decode("utf-8"))
        grid = GridSpec(tuple(header["grid"]["n"]), tuple(header["grid"]["length"]))
        physics = PhysicsConfig(**header["physics"])
        time = float(header["time"])
    except (ValueError, KeyError, TypeError) as exc:
        raise HeaderError(f"unreadable snapshot header: {exc}") from exc
    if header.get("endianness", "little") != "little":
        raise HeaderError("only little-endian payloads are supported")
    pos += hlen
    payload = data[pos:]
    expected = grid.size * 16 * _DTYPE.itemsize
    if len(payload) != expected:
        if len(payload) < expected and len(payload) % _DTYPE.itemsize:
            raise TruncatedSnapshot(
                f"payload truncated mid-value: {len(payload)} bytes, expected {expected}")
        raise PayloadLengthMismatch(
            f"payload length mismatch: header grid {grid.n} needs {expected} bytes, found {len(payload)}")
    values = np.frombuffer(payload, dtype=_DTYPE).reshape(grid.n + (4, 4)).astype(np.complex128)
    return PhotonField(grid, values, time, physics)


def save(psi: PhotonField, path) -> None:
    atomic_write_bytes(path, encode(psi))


def load(path) -> PhotonField:
    with open(path, "rb") as fh:
        data = fh.read()
    return decode(data)
