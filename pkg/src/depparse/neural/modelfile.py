"""Binary model files.

Layout (all integers little-endian): magic "TUDP", uint32 format version,
uint32 config length + UTF-8 JSON config block, uint32 parameter count,
then per parameter (sorted by name): uint16 name length + name, uint8 ndim,
uint32 dims, raw little-endian float32 data. Readers reject unknown
versions and bad magic.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .optim import ParameterStore
from .tensor import Tensor

MAGIC = b"TUDP"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """File is not a readable model of a supported version."""


def save_model(path, config: dict, store: ParameterStore) -> None:
    optim = {
        "seed": store.seed,
        "beta1": store.beta1,
        "beta2": store.beta2,
        "eps": store.eps,
        "weight_decay": store.weight_decay,
    }
    blob = json.dumps({"config": config, "optim": optim}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(store.params)))
        for name in sorted(store.params):
            data = store.params[name].data
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
            fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    raw = fh.read(count)
    if len(raw) != count:
        raise ModelFormatError(f"truncated model file while reading {what}")
    return raw


def load_model(path) -> tuple[dict, ParameterStore]:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise ModelFormatError(f"{path}: bad magic, not a model file")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"{path}: unsupported format version {version}")
        (blob_len,) = struct.unpack("<I", _read_exact(fh, 4, "config length"))
        blob = json.loads(_read_exact(fh, blob_len, "config block"))
        optim = blob.get("optim", {})
        store = ParameterStore(
            seed=optim.get("seed", 0),
            beta1=optim.get("beta1", 0.9),
            beta2=optim.get("beta2", 0.999),
            eps=optim.get("eps", 1e-8),
            weight_decay=optim.get("weight_decay", 0.01),
        )
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "parameter count"))
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "name length"))
            name = _read_exact(fh, name_len, "name").decode("utf-8")
            (ndim,) = struct.unpack("<B", _read_exact(fh, 1, "ndim"))
            shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim, "shape"))
            n_items = int(np.prod(shape)) if ndim else 1
            raw = _read_exact(fh, 4 * n_items, f"data of {name}")
            data = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float32)
            store.params[name] = Tensor(data, requires_grad=True, op="param")
            store._adam[name] = {
                "m": np.zeros(shape, dtype=np.float32),
                "v": np.zeros(shape, dtype=np.float32),
                "t": 0,
            }
    return blob["config"], store
