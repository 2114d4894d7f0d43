"""Stable 64-bit hashing for split assignment and observation digests.

Python's builtin hash() is salted per process, so everything here goes
through blake2b on a canonical byte encoding instead.  The same inputs
produce the same value in any process on any platform.
"""
from __future__ import annotations

from hashlib import blake2b

import numpy as np


def _encode(value, out: bytearray) -> None:
    # Type tags keep e.g. 1 and "1" and (1,) from colliding.
    if isinstance(value, bool):
        out += b"b" + (b"1" if value else b"0")
    elif isinstance(value, int):
        raw = value.to_bytes((value.bit_length() // 8) + 1, "little", signed=True)
        out += b"i" + len(raw).to_bytes(2, "little") + raw
    elif isinstance(value, float):
        out += b"f" + np.float64(value).tobytes()
    elif isinstance(value, str):
        raw = value.encode("utf-8")
        out += b"s" + len(raw).to_bytes(4, "little") + raw
    elif isinstance(value, bytes):
        out += b"y" + len(value).to_bytes(4, "little") + value
    elif isinstance(value, np.ndarray):
        raw = np.ascontiguousarray(value).tobytes()
        shape = ",".join(str(d) for d in value.shape)
        head = f"a{value.dtype.str}[{shape}]".encode()
        out += head + len(raw).to_bytes(8, "little") + raw
    elif isinstance(value, (tuple, list)):
        out += b"(" + len(value).to_bytes(4, "little")
        for item in value:
            _encode(item, out)
        out += b")"
    elif isinstance(value, dict):
        out += b"{" + len(value).to_bytes(4, "little")
        for key in sorted(value):
            _encode(key, out)
            _encode(value[key], out)
        out += b"}"
    elif value is None:
        out += b"n"
    elif isinstance(value, np.integer):
        _encode(int(value), out)
    elif isinstance(value, np.floating):
        _encode(float(value), out)
    else:
        raise TypeError(f"unhashable value of type {type(value).__name__}")


def canonical_bytes(value) -> bytes:
    """Canonical byte encoding of nested tuples/lists/dicts/scalars/arrays."""
    out = bytearray()
    _encode(value, out)
    return bytes(out)


def stable_hash64(value) -> int:
    """64-bit stable hash of a canonical structure, as an unsigned int."""
    digest = blake2b(canonical_bytes(value), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stable_hash_hex(value) -> str:
    """Same hash, rendered as 16 hex chars (used in trajectory files)."""
    return f"{stable_hash64(value):016x}"
