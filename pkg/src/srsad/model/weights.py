"""Weight container and its binary file format.

Layout (all integers little-endian u32, tensor data little-endian f64):

    magic    4 bytes  b"SRSW"
    version  u32      format version, currently 1
    hdr_len  u32
    header   hdr_len bytes, UTF-8 JSON:
             {"format_version", "model_config", "feature_hash"}
    count    u32      number of tensor records
    then per tensor, in graph order:
             name_len u32, name UTF-8, rank u32, dims u32*rank,
             values f64*prod(dims) in row-major order

Loading validates magic, version, header and every tensor name and shape
against the parameter plan of the embedded config; anything off raises
CorruptWeights.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CorruptWeights
from .config import ModelConfig

MAGIC = b"SRSW"
FORMAT_VERSION = 1


@dataclass
class WeightStore:
    config: ModelConfig
    feature_hash: str
    tensors: dict[str, np.ndarray]

    @property
    def n_params(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def clone(self) -> "WeightStore":
        return WeightStore(config=self.config, feature_hash=self.feature_hash,
                           tensors={k: v.copy() for k, v in self.tensors.items()})


def save_weights(store: WeightStore, path) -> None:
    header = json.dumps({
        "format_version": FORMAT_VERSION,
        "model_config": store.config.to_dict(),
        "feature_hash": store.feature_hash,
    }, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        f.write(header)
        f.write(struct.pack("<I", len(store.tensors)))
        for name, tensor in store.tensors.items():
            encoded = name.encode()
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<I", tensor.ndim))
            f.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            f.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def _read(f, n: int, what: str) -> bytes:
    blob = f.read(n)
    if len(blob) != n:
        raise CorruptWeights(f"truncated weight file while reading {what}")
    return blob


def load_weights(path) -> WeightStore:
    from .network import parameter_plan

    with open(path, "rb") as f:
        if _read(f, 4, "magic") != MAGIC:
            raise CorruptWeights(f"{path}: not a weight file (bad magic)")
        version, hdr_len = struct.unpack("<II", _read(f, 8, "header length"))
        if version != FORMAT_VERSION:
            raise CorruptWeights(f"{path}: format version {version}, "
                                 f"expected {FORMAT_VERSION}")
        try:
            header = json.loads(_read(f, hdr_len, "header"))
            config = ModelConfig.from_dict(header["model_config"])
            feature_hash = header["feature_hash"]
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptWeights(f"{path}: bad header: {exc}") from exc
        count, = struct.unpack("<I", _read(f, 4, "tensor count"))
        tensors = {}
        for _ in range(count):
            name_len, = struct.unpack("<I", _read(f, 4, "name length"))
            name = _read(f, name_len, "name").decode()
            rank, = struct.unpack("<I", _read(f, 4, "rank"))
            dims = struct.unpack(f"<{rank}I", _read(f, 4 * rank, "dims"))
            n_values = int(np.prod(dims)) if dims else 1
            blob = _read(f, 8 * n_values, f"tensor {name}")
            tensors[name] = np.frombuffer(blob, dtype="<f8").reshape(dims).copy()
        if f.read(1):
            raise CorruptWeights(f"{path}: trailing bytes after last tensor")

    expected = [(name, shape) for name, shape, _ in parameter_plan(config)]
    actual = [(name, tensor.shape) for name, tensor in tensors.items()]
    if expected != actual:
        raise CorruptWeights(
            f"{path}: tensor names/shapes do not match the embedded config")
    return WeightStore(config=config, feature_hash=feature_hash, tensors=tensors)
