"""TXRW tensor container.

Layout, all integers little-endian u32::

    b"TXRW" | version | tensor count
    per tensor: name length | name (utf-8) | rank | dims... | float64 LE data | crc32(data)

Tensors are written in the order given; readers return them in file order.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import WeightsFormatError

MAGIC = b"TXRW"
VERSION = 1


def dumps(tensors: dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype="<f8")
        encoded = name.encode("utf-8")
        payload = arr.tobytes()
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(payload)
        parts.append(struct.pack("<I", zlib.crc32(payload)))
    return b"".join(parts)


def loads(buf: bytes) -> dict[str, np.ndarray]:
    view = memoryview(buf)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise WeightsFormatError("truncated tensor file")
        chunk = view[pos : pos + n]
        pos += n
        return chunk

    if bytes(take(4)) != MAGIC:
        raise WeightsFormatError("bad magic, not a TXRW file")
    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise WeightsFormatError(f"unsupported TXRW version {version}")
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4))
        name = bytes(take(name_len)).decode("utf-8")
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        nbytes = 8 * int(np.prod(dims, dtype=np.int64))
        payload = bytes(take(nbytes))
        (crc,) = struct.unpack("<I", take(4))
        if zlib.crc32(payload) != crc:
            raise WeightsFormatError(f"checksum mismatch in tensor {name!r}")
        out[name] = np.frombuffer(payload, dtype="<f8").reshape(dims).astype(np.float64)
    if pos != len(view):
        raise WeightsFormatError("trailing bytes after last tensor")
    return out


def save(path, tensors: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(dumps(tensors))


def load(path) -> dict[str, np.ndarray]:
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise WeightsFormatError(f"{path}: {exc}") from exc
    return loads(buf)
