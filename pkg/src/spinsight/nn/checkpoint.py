"""Model checkpoints: magic QNET, a JSON layer descriptor, then the raw
little-endian float64 parameter arrays.  Byte-identical for identical
parameters, so checkpoints participate in determinism checks."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataError
from .network import Network, network_from_meta

QNET_MAGIC = b"QNET"
QNET_VERSION = 1


def save_checkpoint(net: Network, path) -> None:
    meta = json.dumps(net.meta, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(QNET_MAGIC)
        fh.write(struct.pack("<HI", QNET_VERSION, len(meta)))
        fh.write(meta)
        params = net.parameters()
        fh.write(struct.pack("<I", len(params)))
        for p in params:
            fh.write(struct.pack("<B", p.ndim))
            fh.write(struct.pack(f"<{p.ndim}I", *p.shape))
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path) -> Network:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint missing: {path}")
    raw = path.read_bytes()
    if raw[:4] != QNET_MAGIC:
        raise DataError(f"{path}: not a QNET checkpoint")
    version, meta_len = struct.unpack_from("<HI", raw, 4)
    if version != QNET_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    pos = 10
    meta = json.loads(raw[pos : pos + meta_len].decode())
    pos += meta_len
    (count,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    arrays = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<B", raw, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", raw, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(raw, dtype="<f8", count=size, offset=pos)
        pos += 8 * size
        arrays.append(arr.reshape(shape).astype(np.float64))
    net = network_from_meta(meta)
    net.set_parameters(arrays)
    return net
