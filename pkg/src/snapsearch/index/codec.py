"""Variable-byte and difference coding for postings.

Each integer is written as little-endian 7-bit groups; the high bit is set
on every byte except the last one of a value. So 128 becomes ``80 01``
and 300 becomes ``AC 02``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from ..errors import CodecError, IntegrityError

MAX_VALUE = (1 << 64) - 1
_MAX_BYTES = 10  # ceil(64 / 7)


def encode_one(value: int, out: bytearray) -> None:
    if value < 0 or value > MAX_VALUE:
        raise CodecError(f"value {value} outside [0, 2^64)")
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def encode_vbyte(values: Iterable[int]) -> bytes:
    out = bytearray()
    for value in values:
        encode_one(value, out)
    return bytes(out)


def decode_one(data: bytes | bytearray | memoryview, pos: int) -> tuple[int, int]:
    """Decode a single value starting at ``pos``; return (value, next_pos)."""
    value = 0
    shift = 0
    end = len(data)
    start = pos
    while True:
        if pos >= end:
            raise CodecError(f"truncated varbyte at offset {start}")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if byte < 0x80:
            break
        shift += 7
        if pos - start >= _MAX_BYTES:
            raise CodecError(f"varbyte longer than {_MAX_BYTES} bytes at offset {start}")
    if value > MAX_VALUE:
        raise CodecError(f"varbyte at offset {start} exceeds 64 bits")
    return value, pos


def decode_vbyte(data: bytes | bytearray | memoryview) -> list[int]:
    values = []
    pos = 0
    end = len(data)
    while pos < end:
        value, pos = decode_one(data, pos)
        values.append(value)
    return values


def delta_encode(doc_ids: Sequence[int]) -> list[int]:
    """First id absolute, then gaps to the predecessor (all >= 1)."""
    gaps = []
    prev = None
    for doc_id in doc_ids:
        if prev is None:
            gaps.append(doc_id)
        else:
            if doc_id <= prev:
                raise IntegrityError(f"doc ids not strictly increasing: {prev} then {doc_id}")
            gaps.append(doc_id - prev)
        prev = doc_id
    return gaps


def delta_decode(gaps: Sequence[int]) -> list[int]:
    ids = []
    total = 0
    for i, gap in enumerate(gaps):
        if i and gap < 1:
            raise IntegrityError(f"gap {gap} at position {i} must be >= 1")
        total += gap
        ids.append(total)
    return ids
