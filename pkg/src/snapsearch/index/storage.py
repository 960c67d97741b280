"""Bit-exact index file format.

All integers are varbyte-coded (see ``codec``)::

    magic        b"CHS1"
    stats        N, total_terms, text_bytes, term_count
    doc table    N x (doc_id gap, length, days since 1990-01-01)
                 (first doc_id absolute, ids ascending)
    dictionary   term_count x (utf8 length, utf8 bytes, postings offset, group count)
                 terms in ascending UTF-8 byte order; offsets are relative
                 to the start of the postings section
    postings     section byte length, then per term and per group:
                 tf, count, doc-id gaps (first absolute)

Groups are stored tf-descending, so a reader can stop after the high-impact
groups.
"""

from __future__ import annotations

from datetime import timedelta
from pathlib import Path

from ..corpus import EPOCH
from ..errors import CodecError, UndefinedRatioError
from .codec import decode_one, delta_decode, delta_encode, encode_one
from .inverted import DocEntry, Index, PostingsList

MAGIC = b"CHS1"


def to_bytes(index: Index) -> bytes:
    out = bytearray(MAGIC)
    terms = sorted(index.dictionary, key=lambda t: t.encode("utf-8"))
    for v in (len(index.doc_table), index.stats.total_terms, index.text_bytes, len(terms)):
        encode_one(v, out)

    prev = None
    for doc_id, entry in index.doc_table.items():
        encode_one(doc_id if prev is None else doc_id - prev, out)
        encode_one(entry.length, out)
        encode_one((entry.modified_date - EPOCH).days, out)
        prev = doc_id

    postings = bytearray()
    offsets = []
    for term in terms:
        offsets.append(len(postings))
        for tf, ids in index.dictionary[term].groups:
            encode_one(tf, postings)
            encode_one(len(ids), postings)
            for gap in delta_encode(ids):
                encode_one(gap, postings)

    for term, offset in zip(terms, offsets):
        raw = term.encode("utf-8")
        encode_one(len(raw), out)
        out += raw
        encode_one(offset, out)
        encode_one(len(index.dictionary[term].groups), out)

    encode_one(len(postings), out)
    out += postings
    return bytes(out)


def from_bytes(data: bytes) -> Index:
    if data[:4] != MAGIC:
        raise CodecError("not an index file (bad magic)")
    pos = 4
    n_docs, pos = decode_one(data, pos)
    _total, pos = decode_one(data, pos)
    text_bytes, pos = decode_one(data, pos)
    n_terms, pos = decode_one(data, pos)

    doc_table = {}
    doc_id = 0
    for i in range(n_docs):
        gap, pos = decode_one(data, pos)
        doc_id = gap if i == 0 else doc_id + gap
        length, pos = decode_one(data, pos)
        days, pos = decode_one(data, pos)
        doc_table[doc_id] = DocEntry(length, EPOCH + timedelta(days=days))

    entries = []
    for _ in range(n_terms):
        size, pos = decode_one(data, pos)
        if pos + size > len(data):
            raise CodecError("truncated dictionary term")
        term = bytes(data[pos : pos + size]).decode("utf-8")
        pos += size
        offset, pos = decode_one(data, pos)
        n_groups, pos = decode_one(data, pos)
        entries.append((term, offset, n_groups))

    section, pos = decode_one(data, pos)
    base = pos
    if base + section != len(data):
        raise CodecError("postings section length mismatch")

    dictionary = {}
    for term, offset, n_groups in entries:
        p = base + offset
        groups = []
        for _ in range(n_groups):
            tf, p = decode_one(data, p)
            count, p = decode_one(data, p)
            gaps = []
            for _ in range(count):
                g, p = decode_one(data, p)
                gaps.append(g)
            groups.append((tf, tuple(delta_decode(gaps))))
        dictionary[term] = PostingsList(tuple(groups))
    return Index(dictionary, doc_table, text_bytes)


def write_index(index: Index, path: str | Path) -> int:
    data = to_bytes(index)
    Path(path).write_bytes(data)
    return len(data)


def read_index(path: str | Path) -> Index:
    return from_bytes(Path(path).read_bytes())


def index_ratio(index: Index) -> float:
    """Persisted index bytes divided by corpus text bytes."""
    if len(index) == 0 or index.text_bytes == 0:
        raise UndefinedRatioError("index ratio undefined for an empty corpus")
    return len(to_bytes(index)) / index.text_bytes
