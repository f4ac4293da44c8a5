"""VLEB: a self-contained binary bundle of float32 embeddings.

Layout (all integers little-endian unsigned 32-bit):

    offset  size          field
    0       4             magic, the ASCII bytes "VLEB"
    4       4             format version, currently 1
    8       4             dim   (columns per embedding)
    12      4             count (number of embeddings)
    16      4             meta_len
    20      meta_len      UTF-8 JSON metadata object
    20+m    4*count*dim   payload, row-major IEEE-754 binary32

Total file size is exactly 20 + meta_len + 4*count*dim; anything shorter or
longer is rejected. Metadata carries three keys: "kind" (one of "image",
"text", "object", "prototype"), optional "labels" (list of count strings),
and optional "extra" (free-form object). Values are stored as float32;
reading returns float64 copies, and every float32 value, signed zeros and
subnormals included, survives a write/read cycle bit for bit. NaN and Inf
are rejected on both paths.
"""

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DimMismatchError,
    MetaParseError,
    NonFiniteError,
    TruncatedFileError,
    UnsupportedVersionError,
    VlebFormatError,
)

MAGIC = b"VLEB"
VERSION = 1
HEADER = struct.Struct("<4sIIII")
KINDS = ("image", "text", "object", "prototype")
_META_KEYS = {"kind", "labels", "extra"}


def _check_meta(meta, count: int) -> dict:
    if not isinstance(meta, dict):
        raise MetaParseError(f"meta must be a JSON object, got {type(meta).__name__}")
    unknown = set(meta) - _META_KEYS
    if unknown:
        raise MetaParseError(f"unknown meta keys: {sorted(unknown)}")
    kind = meta.get("kind")
    if kind not in KINDS:
        raise MetaParseError(f"meta.kind must be one of {KINDS}, got {kind!r}")
    labels = meta.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise MetaParseError("meta.labels must be a list of strings")
        if len(labels) != count:
            raise MetaParseError(
                f"meta.labels has {len(labels)} entries for {count} embeddings"
            )
    if "extra" in meta and not isinstance(meta["extra"], dict):
        raise MetaParseError("meta.extra must be an object")
    return meta


def _payload_array(embeddings, dim: int | None) -> np.ndarray:
    arr = np.asarray(embeddings, dtype=np.float64)
    if arr.size == 0:
        width = dim if dim is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        arr = arr.reshape(0, width)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimMismatchError(f"embeddings must form a 2-D matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimMismatchError(f"embeddings have dim {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("embeddings contain NaN or Inf")
    with np.errstate(over="ignore"):
        payload = arr.astype("<f4")
    if not np.all(np.isfinite(payload)):
        raise NonFiniteError("embedding values overflow the 32-bit float range")
    return payload


def encode_bundle(embeddings, meta: dict, dim: int | None = None) -> bytes:
    """Serialize embeddings plus metadata to VLEB bytes."""
    payload = _payload_array(embeddings, dim)
    count, width = payload.shape
    _check_meta(meta, count)
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    header = HEADER.pack(MAGIC, VERSION, width, count, len(meta_bytes))
    return header + meta_bytes + payload.tobytes(order="C")


def decode_bundle(data: bytes) -> tuple[np.ndarray, dict]:
    """Parse VLEB bytes back into (float64 embeddings, metadata)."""
    if len(data) >= 4 and data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    if len(data) < HEADER.size:
        raise TruncatedFileError(f"file has {len(data)} bytes, header needs {HEADER.size}")
    _, version, dim, count, meta_len = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"version {version} not supported (expected {VERSION})")
    expected = HEADER.size + meta_len + 4 * count * dim
    if len(data) < expected:
        raise TruncatedFileError(f"file has {len(data)} bytes, layout needs {expected}")
    if len(data) > expected:
        raise VlebFormatError(f"{len(data) - expected} trailing bytes after payload")
    try:
        meta = json.loads(data[HEADER.size : HEADER.size + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MetaParseError(f"metadata is not valid UTF-8 JSON: {exc}") from None
    _check_meta(meta, count)
    payload = np.frombuffer(data, dtype="<f4", count=count * dim, offset=HEADER.size + meta_len)
    payload = payload.reshape(count, dim)
    if not np.all(np.isfinite(payload)):
        raise NonFiniteError("payload contains NaN or Inf")
    return payload.astype(np.float64), meta


def write_bundle(embeddings, meta: dict, path, dim: int | None = None) -> None:
    """Write a bundle atomically (temp file in the same directory, then rename)."""
    data = encode_bundle(embeddings, meta, dim)
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", suffix=".vleb.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_bundle(path) -> tuple[np.ndarray, dict]:
    """Read and validate a bundle file."""
    return decode_bundle(Path(path).read_bytes())
