"""``.tssm`` model checkpoints.

Layout (little-endian): ``"TSSM"``, u16 version, u32 descriptor length, UTF-8
JSON architecture descriptor, then every parameter and buffer array as f64 in
the order of :meth:`Sequential.state`.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from ..exceptions import CorruptionError, FormatError
from .network import Sequential

MAGIC = b"TSSM"
VERSION = 1
_HEAD = struct.Struct("<4sHI")


def save_model(model: Sequential, path, extra: dict | None = None) -> None:
    desc = model.architecture()
    if extra:
        desc["meta"] = extra
    blob = json.dumps(desc, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(blob)))
        fh.write(blob)
        for arr in model.state():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> tuple[Sequential, dict]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEAD.size or data[:4] != MAGIC:
        raise FormatError(f"{path}: not a TSSM checkpoint")
    _, version, n = _HEAD.unpack_from(data)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    pos = _HEAD.size
    if pos + n > len(data):
        raise CorruptionError(f"{path}: truncated descriptor", pos)
    desc = json.loads(data[pos:pos + n].decode("utf-8"))
    pos += n
    model = Sequential.from_architecture(desc)
    arrays = []
    for arr in model.state():
        size = arr.size * 8
        if pos + size > len(data):
            raise CorruptionError(f"{path}: truncated parameters", pos)
        arrays.append(np.frombuffer(data, "<f8", arr.size, pos).reshape(arr.shape).astype(float))
        pos += size
    if pos != len(data):
        raise CorruptionError(f"{path}: {len(data) - pos} trailing bytes", pos)
    model.load_state(arrays)
    return model, desc.get("meta", {})
