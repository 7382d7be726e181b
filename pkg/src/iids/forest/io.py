"""Binary persistence for :class:`ForestModel`.

File layout (all integers little-endian)::

    magic      8 bytes   b"IIDSRF\\r\\n"
    version    uint32    FORMAT_VERSION
    hdr_len    uint32    length of the JSON header in bytes
    header     hdr_len   UTF-8 JSON: config, class_names, feature_names,
                         importances, scaler, node_counts (one per tree)
    per tree, n = node_counts[t], m = len(class_names):
        feature    int32[n]     split feature, -1 for leaves
        threshold  float64[n]
        left       int32[n]     child offsets within the tree, -1 for leaves
        right      int32[n]
        gain       float64[n]   Gini decrease, 0 for leaves
        counts     int64[n*m]   training class counts, row-major
    crc32      uint32    zlib.crc32 of every preceding byte
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import asdict

import numpy as np

from ..data import ScalerParams
from ..errors import ModelFormatError
from .core import ForestConfig, ForestModel, Tree

MAGIC = b"IIDSRF\r\n"
FORMAT_VERSION = 1

_ARRAYS = (
    ("feature", "<i4", False),
    ("threshold", "<f8", False),
    ("left", "<i4", False),
    ("right", "<i4", False),
    ("gain", "<f8", False),
    ("counts", "<i8", True),
)


def dumps(model: ForestModel) -> bytes:
    header = {
        "config": asdict(model.config),
        "class_names": list(model.class_names),
        "feature_names": list(model.feature_names),
        "importances": model.importances.tolist(),
        "scaler": None
        if model.scaler is None
        else {"means": model.scaler.means.tolist(), "stddevs": model.scaler.stddevs.tolist()},
        "node_counts": [t.node_count for t in model.trees],
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(head)), head]
    for tree in model.trees:
        for name, dtype, _ in _ARRAYS:
            parts.append(np.ascontiguousarray(getattr(tree, name), dtype=dtype).tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def loads(blob: bytes) -> ForestModel:
    if len(blob) < len(MAGIC) + 12 or not blob.startswith(MAGIC):
        raise ModelFormatError("not a forest model file (bad magic or truncated)")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    version, head_len = struct.unpack_from("<II", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")
    if zlib.crc32(body) != crc:
        raise ModelFormatError("model file is corrupt (checksum mismatch or truncated)")

    pos = len(MAGIC) + 8
    try:
        header = json.loads(body[pos : pos + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model header: {exc}") from None
    pos += head_len

    m = len(header["class_names"])
    trees = []
    for n in header["node_counts"]:
        arrays = {}
        for name, dtype, per_class in _ARRAYS:
            count = n * m if per_class else n
            size = count * np.dtype(dtype).itemsize
            if pos + size > len(body):
                raise ModelFormatError("model file is truncated")
            arrays[name] = np.frombuffer(body, dtype=dtype, count=count, offset=pos)
            pos += size
        arrays["counts"] = arrays["counts"].reshape(n, m)
        trees.append(Tree(**arrays))
    if pos != len(body):
        raise ModelFormatError("trailing bytes after tree data")

    scaler = header["scaler"]
    if scaler is not None:
        scaler = ScalerParams(scaler["means"], scaler["stddevs"])
    return ForestModel(
        trees,
        ForestConfig(**header["config"]),
        header["class_names"],
        header["feature_names"],
        header["importances"],
        scaler,
    )


def save_model(model: ForestModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def load_model(path) -> ForestModel:
    with open(path, "rb") as fh:
        return loads(fh.read())
