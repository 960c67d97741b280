"""Dated documents, the JSON-lines corpus format, and the tokenizer.

Corpus files hold one JSON object per line with exactly the keys
``doc_id``, ``uri``, ``modified_date`` (``YYYY-MM-DD``) and ``text``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

from .errors import IntegrityError, ParseError

EPOCH = date(1990, 1, 1)
MAX_DATE = date(2100, 12, 31)

_FIELDS = frozenset(("doc_id", "uri", "modified_date", "text"))
# [^\W_] is exactly str.isalnum() in the re module.
_TOKEN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Document:
    doc_id: int
    uri: str
    modified_date: date
    text: str

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "uri": self.uri,
            "modified_date": self.modified_date.isoformat(),
            "text": self.text,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Document":
        """Validate a decoded JSON object and build a Document.

        Raises ValueError for shape problems and IntegrityError for an
        out-of-range date; callers attach file positions.
        """
        if not isinstance(record, dict):
            raise ValueError("record is not a JSON object")
        keys = set(record)
        if keys != _FIELDS:
            missing = sorted(_FIELDS - keys)
            extra = sorted(keys - _FIELDS)
            raise ValueError(f"bad fields (missing={missing}, unexpected={extra})")
        doc_id = record["doc_id"]
        if not isinstance(doc_id, int) or isinstance(doc_id, bool) or doc_id < 0:
            raise ValueError(f"doc_id must be a non-negative integer, got {doc_id!r}")
        if not isinstance(record["uri"], str):
            raise ValueError("uri must be a string")
        if not isinstance(record["text"], str):
            raise ValueError("text must be a string")
        raw_date = record["modified_date"]
        if not isinstance(raw_date, str) or len(raw_date) != 10:
            raise ValueError(f"modified_date must be YYYY-MM-DD, got {raw_date!r}")
        try:
            when = date.fromisoformat(raw_date)
        except ValueError:
            raise ValueError(f"modified_date must be YYYY-MM-DD, got {raw_date!r}") from None
        check_date(when)
        return cls(doc_id, record["uri"], when, record["text"])


def check_date(when: date) -> None:
    if not EPOCH <= when <= MAX_DATE:
        raise IntegrityError(f"date {when.isoformat()} outside {EPOCH}..{MAX_DATE}")


def tokenize(text: str) -> list[str]:
    """Lowercase, then split on maximal runs of non-alphanumeric characters.

    No stemming, stopword removal or pruning.

    >>> tokenize("IPv4 2021-03")
    ['ipv4', '2021', '03']
    """
    return _TOKEN.findall(text.lower())


def iter_corpus(path: str | Path) -> Iterator[Document]:
    """Stream documents from a corpus file, validating as it goes."""
    path = Path(path)
    seen: set[int] = set()
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8 ({exc.reason})", path, lineno) from None
            if line.endswith("\n"):
                line = line[:-1]
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", path, lineno) from None
            try:
                doc = Document.from_record(record)
            except IntegrityError as exc:
                raise IntegrityError(str(exc), path, lineno) from None
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
            if doc.doc_id in seen:
                raise IntegrityError(f"duplicate doc_id {doc.doc_id}", path, lineno)
            seen.add(doc.doc_id)
            yield doc


def load_corpus(path: str | Path) -> list[Document]:
    return list(iter_corpus(path))


def dumps_document(doc: Document) -> str:
    return json.dumps(doc.to_record(), ensure_ascii=False, separators=(",", ":"))


def write_corpus(path: str | Path, docs: Iterable[Document]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(dumps_document(doc))
            fh.write("\n")


def check_unique(docs: Iterable[Document]) -> None:
    seen: set[int] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise IntegrityError(f"duplicate doc_id {doc.doc_id}")
        seen.add(doc.doc_id)
