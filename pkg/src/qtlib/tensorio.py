"""Tensor files: a fixed binary layout and a JSON layout.

Binary (``.qtns``)::

    offset  size  field
    0       6     magic b"QTNS1\\n"
    6       2     zero padding
    8       24    n1, n2, n3 as little-endian uint64
    32      16    reserved, zero
    48      32*N  (w, x, y, z) little-endian float64 per entry, (k, i, j) order

JSON: ``{"dims": [n1, n2, n3], "slices": [[[[w, x, y, z], ...], ...], ...]}``
with the same (k, i, j) nesting.  Floats are written with ``repr`` precision,
so both formats round-trip bit-exactly.
"""
from __future__ import annotations

import json
import os
import struct
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import QtError, ShapeMismatch
from .qtensor import QTensor

MAGIC = b"QTNS1\n"
HEADER_SIZE = 48
_HEADER = struct.Struct("<6s2x3Q16x")


class TensorFormatError(QtError, ValueError):
    pass


def _wxyz(T: QTensor) -> np.ndarray:
    """(n3, n1, n2, 4) float array of components."""
    return np.stack(T.components(), axis=-1).transpose(2, 0, 1, 3)


def _from_wxyz(a: np.ndarray) -> QTensor:
    a = a.transpose(1, 2, 0, 3)
    return QTensor.from_components(a[..., 0], a[..., 1], a[..., 2], a[..., 3])


def to_bytes(T: QTensor) -> bytes:
    body = np.ascontiguousarray(_wxyz(T), dtype="<f8").tobytes()
    return _HEADER.pack(MAGIC, *T.shape) + body


def from_bytes(buf: bytes) -> QTensor:
    if len(buf) < HEADER_SIZE:
        raise TensorFormatError(f"truncated header ({len(buf)} bytes)")
    magic, n1, n2, n3 = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}")
    n = n1 * n2 * n3
    if len(buf) != HEADER_SIZE + 32 * n:
        raise TensorFormatError(f"expected {HEADER_SIZE + 32 * n} bytes for {n1}x{n2}x{n3}, got {len(buf)}")
    if n == 0:
        raise ShapeMismatch("tensor dimensions must be positive")
    a = np.frombuffer(buf, dtype="<f8", offset=HEADER_SIZE).reshape(n3, n1, n2, 4)
    return _from_wxyz(a.astype(float))


def to_json_obj(T: QTensor) -> dict:
    return {"dims": list(T.shape), "slices": _wxyz(T).tolist()}


def from_json_obj(obj: dict) -> QTensor:
    try:
        n1, n2, n3 = (int(v) for v in obj["dims"])
        a = np.array(obj["slices"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise TensorFormatError(f"malformed JSON tensor: {e}") from e
    if min(n1, n2, n3) <= 0:
        raise ShapeMismatch("tensor dimensions must be positive")
    if a.shape != (n3, n1, n2, 4):
        raise TensorFormatError(f"slices have shape {a.shape}, dims say {(n3, n1, n2, 4)}")
    return _from_wxyz(a)


def to_json(T: QTensor) -> str:
    return json.dumps(to_json_obj(T))


def from_json(text: str) -> QTensor:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise TensorFormatError(f"invalid JSON: {e}") from e
    return from_json_obj(obj)


def atomic_write(path, data: bytes | str):
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    mode = "w" if isinstance(data, str) else "wb"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({"encoding": "utf-8", "newline": ""} if mode == "w" else {})) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def guess_format(path) -> str:
    return "json" if str(path).lower().endswith(".json") else "bin"


def save(T: QTensor, path, fmt: str | None = None):
    fmt = fmt or guess_format(path)
    if fmt == "json":
        atomic_write(path, to_json(T))
    elif fmt == "bin":
        atomic_write(path, to_bytes(T))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load(path, fmt: str | None = None) -> QTensor:
    path = Path(path)
    fmt = fmt or guess_format(path)
    if fmt == "json":
        text = path.read_text(encoding="utf-8")
        obj = json.loads(text) if text.strip() else {}
        if isinstance(obj, dict) and "input" in obj and "dims" not in obj:
            obj = obj["input"]  # golden example files carry the input under "input"
        return from_json_obj(obj)
    return from_bytes(path.read_bytes())


# -- shipped golden examples -------------------------------------------------

GOLDEN = ("polar", "plu", "svd")


def golden_path(name: str) -> Path:
    if name not in GOLDEN:
        raise KeyError(f"no golden example {name!r}; choose from {GOLDEN}")
    return Path(str(resources.files("qtlib") / "data" / "golden" / f"{name}.json"))


def load_golden(name: str) -> dict:
    """Return {"input": QTensor, <factor>: QTensor, ..., "meta": dict}."""
    raw = json.loads(golden_path(name).read_text(encoding="utf-8"))
    out = {"meta": raw.get("meta", {})}
    for key, val in raw.items():
        if isinstance(val, dict) and "dims" in val:
            out[key] = from_json_obj(val)
    if "hat_singular_values" in raw:
        out["hat_singular_values"] = np.array(raw["hat_singular_values"], dtype=float)
    return out
