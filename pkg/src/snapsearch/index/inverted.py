"""Term-only inverted file with postings grouped by term frequency.

Within a postings list, groups are ordered by tf descending and each group
holds strictly increasing doc ids. The in-memory index also keeps dense
numpy views (documents numbered 0..N-1 in doc_id order) for scoring.
"""

from __future__ import annotations

from collections import Counter
from itertools import groupby
from operator import itemgetter
from dataclasses import dataclass, field
from datetime import date
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from ..corpus import EPOCH, Document, tokenize
from ..errors import IntegrityError
from .ranking import idf, term_weights


class Posting(NamedTuple):
    doc_id: int
    tf: int


@dataclass(frozen=True)
class PostingsList:
    groups: tuple[tuple[int, tuple[int, ...]], ...]

    @classmethod
    def from_postings(cls, postings: Iterable[tuple[int, int]]) -> "PostingsList":
        by_tf: dict[int, list[int]] = {}
        for doc_id, tf in postings:
            if tf < 1:
                raise IntegrityError(f"tf must be >= 1, got {tf}")
            by_tf.setdefault(tf, []).append(doc_id)
        groups = []
        for tf in sorted(by_tf, reverse=True):
            ids = sorted(by_tf[tf])
            for a, b in zip(ids, ids[1:]):
                if a == b:
                    raise IntegrityError(f"doc {a} appears twice in one postings list")
            groups.append((tf, tuple(ids)))
        return cls(tuple(groups))

    @property
    def df(self) -> int:
        return sum(len(ids) for _, ids in self.groups)

    def postings(self) -> list[Posting]:
        return [Posting(d, tf) for tf, ids in self.groups for d in ids]


@dataclass(frozen=True)
class CollectionStats:
    N: int
    total_terms: int
    df: Mapping[str, int] = field(default_factory=dict)

    @property
    def avg_doclen(self) -> float:
        return self.total_terms / self.N if self.N else 0.0

    @classmethod
    def combine(cls, parts: Iterable["CollectionStats"]) -> "CollectionStats":
        n = 0
        total = 0
        df: Counter = Counter()
        for part in parts:
            n += part.N
            total += part.total_terms
            df.update(part.df)
        return cls(n, total, dict(df))


class DocEntry(NamedTuple):
    length: int
    modified_date: date


class Hit(NamedTuple):
    doc_id: int
    score: float


@dataclass(frozen=True)
class SearchResult:
    """Ranked hits: score descending, ties by doc_id ascending."""

    hits: tuple[Hit, ...] = ()

    def __len__(self):
        return len(self.hits)

    def __iter__(self):
        return iter(self.hits)

    def __getitem__(self, i):
        return self.hits[i]

    @property
    def doc_ids(self) -> list[int]:
        return [h.doc_id for h in self.hits]


class Index:
    """Immutable after construction; safe to share between threads."""

    def __init__(
        self,
        dictionary: Mapping[str, PostingsList],
        doc_table: Mapping[int, DocEntry],
        text_bytes: int = 0,
    ):
        self.dictionary = dict(dictionary)
        self.doc_table = dict(sorted(doc_table.items()))
        self.text_bytes = text_bytes
        total = sum(e.length for e in self.doc_table.values())
        df = {t: p.df for t, p in self.dictionary.items()}
        self.stats = CollectionStats(len(self.doc_table), total, df)

    def __len__(self):
        return len(self.doc_table)

    def __eq__(self, other):
        if not isinstance(other, Index):
            return NotImplemented
        return (
            self.dictionary == other.dictionary
            and self.doc_table == other.doc_table
            and self.text_bytes == other.text_bytes
        )

    __hash__ = None

    # dense views used by search
    @cached_property
    def doc_ids(self) -> np.ndarray:
        return np.fromiter(self.doc_table.keys(), dtype=np.uint64, count=len(self.doc_table))

    @cached_property
    def _doc_id_list(self) -> list[int]:
        return list(self.doc_table.keys())

    @cached_property
    def doclens(self) -> np.ndarray:
        return np.fromiter(
            (e.length for e in self.doc_table.values()), dtype=np.int64, count=len(self.doc_table)
        )

    @cached_property
    def day_numbers(self) -> np.ndarray:
        return np.fromiter(
            ((e.modified_date - EPOCH).days for e in self.doc_table.values()),
            dtype=np.int64,
            count=len(self.doc_table),
        )

    @cached_property
    def _dense(self) -> dict[str, list[tuple[int, np.ndarray]]]:
        return {}

    def dense_postings(self, term: str) -> list[tuple[int, np.ndarray]] | None:
        """Postings of ``term`` as (tf, dense positions) groups, cached."""
        cache = self._dense
        got = cache.get(term)
        if got is None:
            plist = self.dictionary.get(term)
            if plist is None:
                return None
            ids = self.doc_ids
            got = [
                (tf, np.searchsorted(ids, np.asarray(group, dtype=np.uint64)))
                for tf, group in plist.groups
            ]
            cache[term] = got
        return got

    def positions_of(self, doc_ids: Iterable[int]) -> np.ndarray:
        """Dense positions of the given doc ids that exist in this index."""
        wanted = np.fromiter((d for d in doc_ids if d in self.doc_table), dtype=np.uint64)
        return np.searchsorted(self.doc_ids, wanted)


def _counts(doc: Document) -> Counter:
    return Counter(tokenize(doc.text))


def build_index(docs: Iterable[Document]) -> Index:
    return build_from_counts((doc, _counts(doc)) for doc in docs)


def build_from_counts(entries: Iterable[tuple[Document, Mapping[str, int]]]) -> Index:
    """Build from documents paired with their precomputed term counts."""
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_table: dict[int, DocEntry] = {}
    text_bytes = 0
    for doc, counts in entries:
        doc_id = doc.doc_id
        if doc_id in doc_table:
            raise IntegrityError(f"duplicate doc_id {doc_id}")
        doc_table[doc_id] = DocEntry(sum(counts.values()), doc.modified_date)
        text_bytes += len(doc.text.encode("utf-8"))
        for term, tf in counts.items():
            plist = postings.get(term)
            if plist is None:
                postings[term] = [(-tf, doc_id)]
            else:
                plist.append((-tf, doc_id))
    dictionary = {}
    for term, plist in postings.items():
        # (-tf, doc_id) sorts into tf-descending groups of ascending doc ids
        plist.sort()
        groups = tuple(
            (-neg_tf, tuple(d for _, d in run)) for neg_tf, run in groupby(plist, key=itemgetter(0))
        )
        dictionary[term] = PostingsList(groups)
    return Index(dictionary, doc_table, text_bytes)


def _unique_terms(query: Iterable[str]) -> list[str]:
    seen = set()
    out = []
    for term in query:
        if term not in seen:
            seen.add(term)
            out.append(term)
    return out


def search(
    index: Index,
    query: Sequence[str],
    k: int,
    stats_override: CollectionStats | None = None,
    *,
    exclude: Iterable[int] | None = None,
    newer_than: date | None = None,
) -> SearchResult:
    """Top-k documents by summed BM25 over the distinct query terms.

    ``stats_override`` supplies N, avg_doclen and df (for consistent scoring
    across shards). ``exclude`` drops the listed doc ids and ``newer_than``
    keeps only documents modified strictly after that date; both filters
    apply before truncation to k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    stats = stats_override if stats_override is not None else index.stats
    n_local = len(index)
    if n_local == 0:
        return SearchResult()
    acc = None
    hit = None
    doclens = index.doclens
    for term in _unique_terms(query):
        groups = index.dense_postings(term)
        if groups is None:
            continue
        if acc is None:
            acc = np.zeros(n_local, dtype=np.float64)
            hit = np.zeros(n_local, dtype=bool)
        term_idf = idf(stats.df.get(term, 0), stats.N)
        for tf, pos in groups:
            acc[pos] += term_weights(term_idf, stats.avg_doclen, tf, doclens[pos])
            hit[pos] = True
    if acc is None:
        return SearchResult()
    if exclude is not None:
        hit[index.positions_of(exclude)] = False
    if newer_than is not None:
        hit &= index.day_numbers > (newer_than - EPOCH).days
    cand = np.flatnonzero(hit)
    if cand.size == 0:
        return SearchResult()
    scores = acc[cand]
    # dense positions follow doc_id order, so position breaks ties by doc_id
    order = np.lexsort((cand, -scores))[:k]
    ids = index._doc_id_list
    return SearchResult(tuple(Hit(ids[p], float(s)) for p, s in zip(cand[order], scores[order])))
