"""Flat binary container for the dense float64 arrays the tools exchange.

A file is one JSON header line then raw little-endian float64 payload:

    {"magic":"DGT1","kind":"adjacency","dims":[N,N,T],"dtype":"f64le"}\\n
    <N*N*T little-endian float64, row-major, slice-major>

dims are logical [rows, cols, slices] for order-3 kinds and [rows, cols] for
signatures. In memory, slice stacks put the slice axis first, so adjacency
dims [N, N, T] load as a (T, N, N) array. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from math import prod

import numpy as np

MAGIC = "DGT1"
DTYPE = "f64le"

# kind -> logical order of the payload
KINDS = {
    "adjacency": 3,
    "mask": 3,
    "signals": 3,
    "latents": 3,
    "signatures": 2,
}

_HEADER_KEYS = {"magic", "kind", "dims", "dtype"}
_HEADER_SCAN_LIMIT = 65536


class DgtError(ValueError):
    """Malformed container; byte_offset points at the offending position."""

    def __init__(self, message, byte_offset=0):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


def save_dgt(path, arr, kind):
    """Write an array under one of the known kinds.

    Order-3 kinds take the slice-first in-memory layout ((T, N, N) style) and
    store dims as [rows, cols, slices]; signatures store [T, R] directly.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(KINDS)}")
    arr = np.asarray(arr, dtype=np.float64)
    order = KINDS[kind]
    if arr.ndim != order:
        raise ValueError(f"kind {kind!r} stores order-{order} data, got shape {arr.shape}")
    if order == 3:
        dims = [arr.shape[1], arr.shape[2], arr.shape[0]]
    else:
        dims = [arr.shape[0], arr.shape[1]]
    header = json.dumps(
        {"magic": MAGIC, "kind": kind, "dims": dims, "dtype": DTYPE},
        separators=(",", ":"),
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_dgt(path):
    """Read a container back; returns (array, kind) in the in-memory layout."""
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"\n", 0, _HEADER_SCAN_LIMIT)
    if nl < 0:
        raise DgtError("header terminator newline not found", byte_offset=0)
    try:
        header = json.loads(data[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise DgtError(f"header is not valid JSON: {err}", byte_offset=0) from None
    if not isinstance(header, dict):
        raise DgtError("header must be a JSON object", byte_offset=0)
    extra = sorted(set(header) - _HEADER_KEYS)
    if extra:
        raise DgtError(f"unknown header field {extra[0]!r}", byte_offset=0)
    missing = sorted(_HEADER_KEYS - set(header))
    if missing:
        raise DgtError(f"missing header field {missing[0]!r}", byte_offset=0)
    if header["magic"] != MAGIC:
        raise DgtError(f"bad magic {header['magic']!r}", byte_offset=0)
    kind = header["kind"]
    if kind not in KINDS:
        raise DgtError(f"unknown kind {kind!r}", byte_offset=0)
    if header["dtype"] != DTYPE:
        raise DgtError(f"unsupported dtype {header['dtype']!r}", byte_offset=0)
    dims = header["dims"]
    order = KINDS[kind]
    if (
        not isinstance(dims, list)
        or len(dims) != order
        or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims)
    ):
        raise DgtError(
            f"dims must be {order} positive integers for kind {kind!r}, got {dims!r}",
            byte_offset=0,
        )
    payload = data[nl + 1 :]
    expected = prod(dims) * 8
    if len(payload) < expected:
        raise DgtError(
            f"payload truncated: expected {expected} bytes, found {len(payload)}",
            byte_offset=nl + 1 + len(payload),
        )
    if len(payload) > expected:
        raise DgtError(
            f"trailing data: expected {expected} payload bytes, found {len(payload)}",
            byte_offset=nl + 1 + expected,
        )
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if order == 3:
        rows, cols, slices = dims
        return flat.reshape(slices, rows, cols), kind
    rows, cols = dims
    return flat.reshape(rows, cols), kind
