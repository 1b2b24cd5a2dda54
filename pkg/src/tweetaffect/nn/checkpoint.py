"""Binary checkpoint container.

Layout (all integers little-endian)::

    8 bytes   magic b"TWAFCKPT"
    uint32    format version
    uint32    manifest length in bytes
    ...       manifest, UTF-8 JSON (network config, tensor list, extra metadata)
    per tensor, in manifest order:
        uint8   ndim
        uint32  each dimension
        ...     float32 payload, C order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .network import Network

MAGIC = b"TWAFCKPT"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(network: Network, path: str | Path, extra: dict | None = None):
    tensors = [(i, name) for i, layer in enumerate(network.layers) for name in sorted(layer.params)]
    manifest = {
        "network": network.config(),
        "tensors": [{"layer": i, "name": name} for i, name in tensors],
        "extra": extra or {},
    }
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for i, name in tensors:
            arr = np.ascontiguousarray(network.layers[i].params[name], dtype="<f4")
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def _read(fh, n):
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError("checkpoint is truncated")
    return data


def read_manifest(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        return _read_header(fh)


def _read_header(fh) -> dict:
    if _read(fh, len(MAGIC)) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic bytes)")
    version, size = struct.unpack("<II", _read(fh, 8))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    try:
        return json.loads(_read(fh, size).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt manifest: {exc}") from None


def load_checkpoint(path: str | Path, expect: dict | None = None) -> tuple[Network, dict]:
    """Load ``(network, extra)``.

    ``expect`` maps keys of ``extra`` to required values (for example
    ``{"embedding_dim": 200}``); any mismatch is fatal.
    """
    with open(path, "rb") as fh:
        manifest = _read_header(fh)
        network = Network.from_config(manifest["network"])
        for entry in manifest["tensors"]:
            (ndim,) = struct.unpack("<B", _read(fh, 1))
            shape = struct.unpack(f"<{ndim}I", _read(fh, 4 * ndim))
            count = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(_read(fh, 4 * count), dtype="<f4").astype(np.float32).reshape(shape)
            layer = network.layers[entry["layer"]]
            layer.params[entry["name"]] = arr
        if fh.read(1):
            raise CheckpointError("trailing bytes after the last tensor")
    for layer in network.layers:
        for name, shape in layer.param_shapes().items():
            got = layer.params.get(name)
            if got is None or got.shape != tuple(shape):
                raise CheckpointError(
                    f"{layer.kind}.{name}: stored shape {None if got is None else got.shape} != expected {tuple(shape)}"
                )
        layer.zero_grads()
    extra = manifest.get("extra", {})
    for key, want in (expect or {}).items():
        if extra.get(key) != want:
            raise CheckpointError(f"checkpoint {key}={extra.get(key)!r} does not match configured {want!r}")
    return network, extra
