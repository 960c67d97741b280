"""Append-only change log (the archive).

File layout::

    b"CHL1"
    record*   [length u32 LE][payload][crc32c(payload) u32 LE]

The payload is the canonical JSON of a Change (sorted keys, no spaces,
UTF-8). A log may also live purely in memory (``path=None``); the framing
is the same so record sizes are comparable.
"""

from __future__ import annotations

import enum
import json
import os
import struct
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

import crc32c

from ..corpus import Document, check_date
from ..errors import (
    AppendError,
    ArchiveUnavailableError,
    ChecksumError,
    CodecError,
    OrderingError,
    OutOfRangeError,
)

MAGIC = b"CHL1"
_U32 = struct.Struct("<I")


class ChangeKind(str, enum.Enum):
    ADD = "add"
    MODIFY = "modify"
    DELETE = "delete"


@dataclass(frozen=True)
class Change:
    kind: ChangeKind
    date: date
    doc_id: int
    payload: Document | None = None
    seq: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ChangeKind(self.kind))
        check_date(self.date)
        if self.kind is ChangeKind.DELETE:
            if self.payload is not None:
                raise ValueError("delete carries no payload")
        else:
            if self.payload is None:
                raise ValueError(f"{self.kind.value} needs a document payload")
            if self.payload.doc_id != self.doc_id:
                raise ValueError("payload doc_id does not match change doc_id")
            if self.payload.modified_date != self.date:
                raise ValueError("payload modified_date must equal the change date")

    def to_json(self) -> bytes:
        record = {
            "seq": self.seq,
            "kind": self.kind.value,
            "date": self.date.isoformat(),
            "doc_id": self.doc_id,
            "payload": None if self.payload is None else self.payload.to_record(),
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")

    @classmethod
    def from_json(cls, raw: bytes) -> "Change":
        rec = json.loads(raw.decode("utf-8"))
        payload = rec["payload"]
        return cls(
            ChangeKind(rec["kind"]),
            date.fromisoformat(rec["date"]),
            rec["doc_id"],
            None if payload is None else Document.from_record(payload),
            rec["seq"],
        )


def frame(payload: bytes) -> bytes:
    return _U32.pack(len(payload)) + payload + _U32.pack(crc32c.crc32c(payload))


class ChangeLog:
    """Single-writer, many-reader archive of changes.

    Sequence numbers start at 1 and are gapless. With a path, every append
    is flushed and fsynced before it returns; on open, a torn or
    checksum-failing final record is truncated away.
    """

    def __init__(self, path: str | Path | None = None, *, fsync: bool = True):
        self.path = None if path is None else Path(path)
        self.fsync = fsync
        self.online = True
        self._offsets: list[int] = []  # byte offset of each record (file mode)
        self._frames: list[bytes] = []  # memory mode
        self._last_date: date | None = None
        self._size = len(MAGIC)
        self.truncated_bytes = 0
        if self.path is not None:
            self._open()

    def _open(self):
        if not self.path.exists() or self.path.stat().st_size == 0:
            with open(self.path, "wb") as fh:
                fh.write(MAGIC)
                fh.flush()
                os.fsync(fh.fileno())
            return
        data = self.path.read_bytes()
        if data[:4] != MAGIC:
            raise CodecError(f"{self.path}: not a change log (bad magic)")
        pos = 4
        good_end = pos
        last_payload = None
        while pos < len(data):
            if pos + 4 > len(data):
                break
            (length,) = _U32.unpack_from(data, pos)
            end = pos + 4 + length + 4
            if end > len(data):
                break
            payload = data[pos + 4 : pos + 4 + length]
            (crc,) = _U32.unpack_from(data, pos + 4 + length)
            if end == len(data) and crc != crc32c.crc32c(payload):
                break  # torn final record
            self._offsets.append(pos)
            last_payload = payload
            pos = good_end = end
        if good_end < len(data):
            self.truncated_bytes = len(data) - good_end
            with open(self.path, "r+b") as fh:
                fh.truncate(good_end)
                fh.flush()
                os.fsync(fh.fileno())
        self._size = good_end
        if last_payload is not None:
            self._last_date = Change.from_json(last_payload).date

    @property
    def head_seq(self) -> int:
        return len(self._offsets) if self.path is not None else len(self._frames)

    def __len__(self):
        return self.head_seq

    @property
    def size_bytes(self) -> int:
        return self._size

    def append(self, change: Change) -> int:
        """Assign the next sequence number, persist, and return it."""
        if change.seq is not None:
            raise ValueError("change already carries a sequence number")
        if self._last_date is not None and change.date < self._last_date:
            raise OrderingError(
                f"change dated {change.date} precedes last record ({self._last_date})"
            )
        seq = self.head_seq + 1
        record = frame(replace(change, seq=seq).to_json())
        if self.path is None:
            self._frames.append(record)
        else:
            self._write(record)
        self._size += len(record)
        self._last_date = change.date
        return seq

    def extend(self, changes: Iterable[Change]) -> list[int]:
        return [self.append(c) for c in changes]

    def _write(self, record: bytes) -> None:
        start = self._size
        try:
            with open(self.path, "r+b") as fh:
                fh.seek(start)
                fh.write(record)
                fh.flush()
                if self.fsync:
                    os.fsync(fh.fileno())
        except OSError as exc:
            try:
                with open(self.path, "r+b") as fh:
                    fh.truncate(start)
            except OSError:
                pass
            raise AppendError(f"append failed: {exc}") from exc
        self._offsets.append(start)

    def _frame_at(self, seq: int, fh=None) -> bytes:
        if self.path is None:
            return self._frames[seq - 1]
        start = self._offsets[seq - 1]
        end = self._offsets[seq] if seq < len(self._offsets) else self._size
        fh.seek(start)
        return fh.read(end - start)

    def _decode(self, seq: int, raw: bytes) -> Change:
        if len(raw) < 8:
            raise ChecksumError(seq, "short record")
        (length,) = _U32.unpack_from(raw, 0)
        if 4 + length + 4 != len(raw):
            raise ChecksumError(seq, "length field does not match framing")
        payload = raw[4 : 4 + length]
        (crc,) = _U32.unpack_from(raw, 4 + length)
        if crc != crc32c.crc32c(payload):
            raise ChecksumError(seq)
        try:
            change = Change.from_json(payload)
        except (ValueError, KeyError) as exc:
            raise ChecksumError(seq, f"undecodable payload ({exc})") from None
        if change.seq != seq:
            raise ChecksumError(seq, f"payload claims seq {change.seq}")
        return change

    def record_size(self, seq: int) -> int:
        if self.path is None:
            return len(self._frames[seq - 1])
        end = self._offsets[seq] if seq < len(self._offsets) else self._size
        return end - self._offsets[seq - 1]

    def replay(self, from_seq: int = 1, to_seq: int | None = None) -> list[Change]:
        """Checksum-verified records ``from_seq..to_seq`` inclusive."""
        if not self.online:
            raise ArchiveUnavailableError("archive is offline")
        head = self.head_seq
        if to_seq is None:
            to_seq = head
        if from_seq > to_seq and to_seq == head and from_seq == head + 1:
            return []
        if not 1 <= from_seq <= to_seq <= head:
            raise OutOfRangeError(f"range {from_seq}..{to_seq} outside 1..{head}")
        if self.path is None:
            return [self._decode(s, self._frames[s - 1]) for s in range(from_seq, to_seq + 1)]
        with open(self.path, "rb") as fh:
            return [self._decode(s, self._frame_at(s, fh)) for s in range(from_seq, to_seq + 1)]

    def __iter__(self) -> Iterator[Change]:
        return iter(self.replay(1) if self.head_seq else [])


def state_at(changes: Iterable[Change], until: date | None = None) -> dict[int, Document]:
    """Current document per doc_id after applying changes dated <= ``until``."""
    docs: dict[int, Document] = {}
    for change in changes:
        if until is not None and change.date > until:
            break
        if change.kind is ChangeKind.DELETE:
            docs.pop(change.doc_id, None)
        else:
            docs[change.doc_id] = change.payload
    return docs
