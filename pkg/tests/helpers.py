"""Shared generators for tests."""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from snapsearch.corpus import EPOCH
from snapsearch.synth import TextModel, random_documents, random_history
from snapsearch.updates import Change, ChangeKind


def history_changes(n_changes, rng, model, start=EPOCH, span_days=3650, **kw) -> list[Change]:
    return [
        Change(ChangeKind(kind), when, doc_id, doc)
        for kind, when, doc_id, doc in random_history(n_changes, rng, model, start, span_days, **kw)
    ]


def random_queries(rng, vocabulary, n, max_terms=4, unknown_rate=0.05):
    """Queries of 1..max_terms terms, Zipf-ish over the vocabulary, with
    occasional repeated and unknown terms."""
    vocab = list(vocabulary)
    ranks = np.arange(1, len(vocab) + 1, dtype=float)
    weights = 1.0 / ranks
    weights /= weights.sum()
    out = []
    for _ in range(n):
        size = int(rng.integers(1, max_terms + 1))
        terms = [vocab[i] for i in rng.choice(len(vocab), size=size, p=weights)]
        if rng.random() < unknown_rate:
            terms.append("qqqunknownqqq")
        if rng.random() < 0.1:
            terms.append(terms[0])
        out.append(terms)
    return out


def log_uniform_int(rng, lo, hi) -> int:
    return int(round(float(np.exp(rng.uniform(np.log(lo), np.log(hi))))))


def random_corpus(rng, max_docs=10_000, max_vocab=50_000):
    n_docs = log_uniform_int(rng, 1, max_docs)
    vocab = log_uniform_int(rng, 1, max_vocab)
    model = TextModel.create(vocab, rng, s=float(rng.uniform(0.6, 1.4)), mean_length=float(rng.uniform(1, 60)))
    docs = random_documents(n_docs, rng, model, first_id=int(rng.integers(0, 1000)),
                            id_stride=int(rng.integers(1, 4)))
    return docs, model


def days_after(start: date, n: int) -> date:
    return start + timedelta(days=int(n))
