"""Search engine and web size estimation from term document counts.

An engine's size is estimated by asking it how many documents contain each
probe term and dividing by the share of a reference corpus that contains the
term. Several engines are combined in a fixed order, each contributing only
the part of its size not already covered by earlier engines.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from ..corpus import Document
from ..errors import EstimationError, ParameterError
from ..index import Index, build_index, search


@dataclass(frozen=True)
class Probe:
    term: str
    df: int  # documents containing the term in the reference corpus
    n_docs: int  # reference corpus size

    @property
    def fraction(self) -> float:
        return self.df / self.n_docs


def zipf_probes(reference: Index, n: int = 50) -> list[Probe]:
    """``n`` terms at evenly spaced ranks of the reference's df-ranked vocabulary.

    Ranks are df descending, then term. Probe i sits at rank
    floor((2i + 1) V / 2n), the middle of the i-th of n equal slices.
    """
    if len(reference) == 0:
        raise ParameterError("reference index is empty")
    ranked = sorted(reference.dictionary.items(), key=lambda kv: (-kv[1].df, kv[0]))
    vocab = len(ranked)
    if not 1 <= n <= vocab:
        raise ParameterError(f"need 1 <= n <= vocabulary size ({vocab}), got {n}")
    N = len(reference)
    return [
        Probe(ranked[pos][0], ranked[pos][1].df, N)
        for pos in ((2 * i + 1) * vocab // (2 * n) for i in range(n))
    ]


class Engine(Protocol):
    def df(self, term: str) -> int: ...
    def top(self, term: str, k: int) -> list[int]: ...
    def contains(self, doc_id: int) -> bool: ...


class SampleEngine:
    """A synthetic engine over its own document collection."""

    def __init__(self, docs: Iterable[Document] | Index, name: str = "engine"):
        self.index = docs if isinstance(docs, Index) else build_index(docs)
        self.name = name

    def __len__(self):
        return len(self.index)

    def df(self, term: str) -> int:
        postings = self.index.dictionary.get(term)
        return 0 if postings is None else postings.df

    def top(self, term: str, k: int) -> list[int]:
        return search(self.index, [term], k).doc_ids

    def contains(self, doc_id: int) -> bool:
        return doc_id in self.index.doc_table


def estimate_engine_size(engine: Engine, probes: Sequence[Probe]) -> float:
    """Mean over probes of df_engine(t) / p_t."""
    if not probes:
        raise ParameterError("no probes")
    estimates = []
    skipped = 0
    for p in probes:
        if p.df == 0:
            skipped += 1
            continue
        # df * N / df_ref rather than df / (df_ref / N): exact when the engine is the reference
        estimates.append(engine.df(p.term) * p.n_docs / p.df)
    if skipped:
        warnings.warn(f"{skipped} probe(s) with zero reference fraction ignored", stacklevel=2)
    if not estimates:
        raise EstimationError("every probe has zero reference fraction")
    return math.fsum(estimates) / len(estimates)


@dataclass(frozen=True)
class WebSizeEstimate:
    total: float
    sizes: tuple[float, ...]
    uniqueness: tuple[float, ...]


def uniqueness(engine: Engine, earlier: Sequence[Engine], probes: Sequence[Probe], k: int = 10) -> float:
    """1 - share of the engine's top results (over the probes) found in an earlier engine."""
    seen = present = 0
    for p in probes:
        for doc_id in engine.top(p.term, k):
            seen += 1
            if any(e.contains(doc_id) for e in earlier):
                present += 1
    return 1.0 if seen == 0 else 1.0 - present / seen


def estimate_web_size(engines: Sequence[Engine], probes: Sequence[Probe], k: int = 10) -> WebSizeEstimate:
    """size(e1) + sum over later engines of size(e_i) * uniqueness_i, in the given order."""
    if not engines:
        raise ParameterError("need at least one engine")
    sizes = [estimate_engine_size(e, probes) for e in engines]
    uniq = [1.0] + [uniqueness(e, engines[:i], probes, k) for i, e in enumerate(engines) if i > 0]
    total = math.fsum(s * u for s, u in zip(sizes, uniq))
    return WebSizeEstimate(total, tuple(sizes), tuple(uniq))
