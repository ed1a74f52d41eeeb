"""Weight files: JSON manifest + little-endian float64 blob, checksummed.

Layout: 8-byte magic, uint32 header length, UTF-8 JSON header, raw blob.
The header records array shapes (in name order), a free-form meta dict,
and the SHA-256 of the blob so corruption is detected on load.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from cimlab.nncore.net import ParameterBundle

MAGIC = b"CIMWGT01"


def save_weights(path: str | Path, params: ParameterBundle, meta: dict | None = None) -> None:
    names = params.names
    blob = b"".join(np.ascontiguousarray(params[n], dtype="<f8").tobytes() for n in names)
    header = {
        "shapes": {n: list(params[n].shape) for n in names},
        "meta": meta or {},
        "checksum": hashlib.sha256(blob).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        f.write(blob)


def load_weights(path: str | Path) -> tuple[ParameterBundle, dict]:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a weight file (bad magic {magic!r})")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        blob = f.read()
    if hashlib.sha256(blob).hexdigest() != header["checksum"]:
        raise ValueError(f"{path}: checksum mismatch")
    arrays: dict[str, np.ndarray] = {}
    pos = 0
    for name in sorted(header["shapes"]):
        shape = tuple(header["shapes"][name])
        n = int(np.prod(shape)) if shape else 1
        arrays[name] = (
            np.frombuffer(blob, dtype="<f8", count=n, offset=pos).reshape(shape).astype(np.float64)
        )
        pos += n * 8
    return ParameterBundle(arrays), header["meta"]
