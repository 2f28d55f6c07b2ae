"""Binary model container: magic PAWS, version, method tag, metadata text
block, then named length-prefixed little-endian float64 arrays.

Layout::

    b"PAWS"
    u32  version (= 1)
    u32  method tag length, then UTF-8 bytes
    u32  metadata length, then UTF-8 "key=value\n" lines (keys sorted)
    u32  array count
    per array: u32 name length + UTF-8 name, u64 element count, f64 data
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ContainerError

MAGIC = b"PAWS"
VERSION = 1

METHODS = ("eigen", "fisher", "lbph", "sparse", "bark", "woof")


def save_container(path, method: str, metadata: dict[str, str], arrays) -> None:
    """Write a container; ``arrays`` is an ordered (name, ndarray) sequence."""
    if method not in METHODS:
        raise ContainerError(f"unknown method tag {method!r}")
    meta_text = "".join(f"{k}={metadata[k]}\n" for k in sorted(metadata))
    chunks = [MAGIC, struct.pack("<I", VERSION)]
    method_b = method.encode("utf-8")
    chunks.append(struct.pack("<I", len(method_b)))
    chunks.append(method_b)
    meta_b = meta_text.encode("utf-8")
    chunks.append(struct.pack("<I", len(meta_b)))
    chunks.append(meta_b)
    items = list(arrays)
    chunks.append(struct.pack("<I", len(items)))
    for name, arr in items:
        data = np.ascontiguousarray(arr, dtype="<f8")
        name_b = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(name_b)))
        chunks.append(name_b)
        chunks.append(struct.pack("<Q", data.size))
        chunks.append(data.tobytes())
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ContainerError("container truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def load_container(path):
    """Read a container back as (method, metadata dict, {name: 1-D array})."""
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise ContainerError(f"{path} is not a PAWS model")
    version = r.u32()
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    method = r.take(r.u32()).decode("utf-8")
    if method not in METHODS:
        raise ContainerError(f"unknown method tag {method!r}")
    meta_text = r.take(r.u32()).decode("utf-8")
    metadata: dict[str, str] = {}
    for line in meta_text.splitlines():
        key, _, value = line.partition("=")
        metadata[key] = value
    arrays: dict[str, np.ndarray] = {}
    for _ in range(r.u32()):
        name = r.take(r.u32()).decode("utf-8")
        count = r.u64()
        arrays[name] = np.frombuffer(r.take(count * 8), dtype="<f8").copy()
    if r.pos != len(data):
        raise ContainerError("trailing bytes after declared payload")
    return method, metadata, arrays
