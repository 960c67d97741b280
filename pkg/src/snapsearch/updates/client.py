"""Client-side mirror: documents plus an incrementally maintained index.

Maintenance uses a base segment, a small delta segment and tombstones for
base documents that were deleted or replaced. Queries are scored with the
live collection statistics, so results match a from-scratch build of the
current documents exactly. When the delta grows past ``merge_ratio`` of the
base (but at least ``min_merge`` changes) at the end of an applied batch,
everything is rebuilt into a new base.
"""

from __future__ import annotations

from collections import Counter
from datetime import date
from typing import Iterable, Sequence

from ..corpus import Document, tokenize
from ..errors import LogIntegrityError, SequenceError
from ..index import CollectionStats, Index, SearchResult, build_index, search
from ..index.inverted import Hit, build_from_counts
from .log import Change, ChangeKind


class ClientState:
    def __init__(
        self,
        client_id: int = 0,
        *,
        merge_ratio: float = 0.1,
        min_merge: int = 64,
    ):
        self.client_id = client_id
        self.merge_ratio = merge_ratio
        self.min_merge = min_merge
        self.applied_seq = 0
        self.snapshot_date: date | None = None
        self.docs: dict[int, Document] = {}
        self._counts: dict[int, Counter] = {}  # term counts per live doc
        self.stale = False
        self.catch_up_calls = 0
        self.merges = 0

        self.base = build_index([])
        self._tombstones: set[int] = set()
        self._delta_docs: dict[int, Document] = {}
        self._delta: Index | None = build_index([])

        self._n = 0
        self._total_terms = 0
        self._df: Counter = Counter()
        self._stats: CollectionStats | None = None

    @classmethod
    def from_documents(cls, docs: Iterable[Document], applied_seq: int = 0, snapshot_date=None, **kw):
        client = cls(**kw)
        for doc in docs:
            client._insert(doc)
        client._merge()
        client.applied_seq = applied_seq
        client.snapshot_date = snapshot_date
        return client

    # statistics
    @property
    def stats(self) -> CollectionStats:
        if self._stats is None:
            self._stats = CollectionStats(self._n, self._total_terms, dict(self._df))
        return self._stats

    def _account(self, counts: Counter, sign: int) -> None:
        self._n += sign
        self._total_terms += sign * sum(counts.values())
        for term in counts:
            self._df[term] += sign
            if not self._df[term]:
                del self._df[term]
        self._stats = None

    def _insert(self, doc: Document) -> None:
        counts = Counter(tokenize(doc.text))
        self.docs[doc.doc_id] = doc
        self._counts[doc.doc_id] = counts
        self._delta_docs[doc.doc_id] = doc
        self._delta = None
        self._account(counts, +1)

    def _remove(self, doc_id: int) -> None:
        del self.docs[doc_id]
        self._account(self._counts.pop(doc_id), -1)
        if doc_id in self.base.doc_table:
            self._tombstones.add(doc_id)
        if self._delta_docs.pop(doc_id, None) is not None:
            self._delta = None

    def _merge(self) -> None:
        self.base = self._build(sorted(self.docs))
        self._tombstones.clear()
        self._delta_docs.clear()
        self._delta = build_index([])
        self.merges += 1

    def _build(self, doc_ids: Iterable[int]) -> Index:
        return build_from_counts((self.docs[d], self._counts[d]) for d in doc_ids)

    def _maybe_merge(self) -> None:
        pending = len(self._delta_docs) + len(self._tombstones)
        if pending >= max(self.min_merge, self.merge_ratio * len(self.base)):
            self._merge()

    # log application
    def apply(self, changes: Sequence[Change]) -> "ClientState":
        expected = self.applied_seq + 1
        for change in changes:
            if change.seq != expected:
                raise SequenceError(
                    f"client {self.client_id}: expected seq {expected}, got {change.seq}"
                )
            self._apply_one(change)
            self.applied_seq = change.seq
            if self.snapshot_date is None or change.date > self.snapshot_date:
                self.snapshot_date = change.date
            expected += 1
        self._maybe_merge()
        return self

    def _apply_one(self, change: Change) -> None:
        known = change.doc_id in self.docs
        if change.kind is ChangeKind.ADD:
            if known:
                raise LogIntegrityError(f"seq {change.seq}: add of existing doc {change.doc_id}")
            self._insert(change.payload)
        elif change.kind is ChangeKind.MODIFY:
            if not known:
                raise LogIntegrityError(f"seq {change.seq}: modify of unknown doc {change.doc_id}")
            self._remove(change.doc_id)
            self._insert(change.payload)
        else:
            if not known:
                raise LogIntegrityError(f"seq {change.seq}: delete of unknown doc {change.doc_id}")
            self._remove(change.doc_id)

    # queries
    def search(self, query: Sequence[str], k: int) -> SearchResult:
        stats = self.stats
        if self._delta is None:
            self._delta = self._build(self._delta_docs)
        parts = [
            search(self.base, query, k, stats, exclude=self._tombstones or None),
            search(self._delta, query, k, stats),
        ]
        hits = sorted((h for p in parts for h in p), key=lambda h: (-h.score, h.doc_id))
        return SearchResult(tuple(Hit(*h) for h in hits[:k]))

    def rebuilt(self) -> Index:
        """A from-scratch index over the current documents (the oracle view)."""
        return build_index(self.docs.values())


def apply(client: ClientState, changes: Sequence[Change]) -> ClientState:
    return client.apply(changes)
