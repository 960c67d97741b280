"""Seeded generators for English-like corpora and dated change histories."""

from __future__ import annotations

import string
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .corpus import EPOCH, Document

_LETTERS = np.array(list(string.ascii_lowercase))


def make_vocabulary(size: int, rng: np.random.Generator) -> list[str]:
    """Distinct pseudo-words; shorter words get the more frequent ranks."""
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        rank = len(words)
        length = 2 + min(10, int(np.log2(rank + 2))) + int(rng.integers(0, 3))
        word = "".join(rng.choice(_LETTERS, size=length))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def zipf_weights(size: int, s: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, size + 1, dtype=np.float64) ** s
    return w / w.sum()


@dataclass(frozen=True)
class TextModel:
    vocabulary: tuple[str, ...]
    weights: np.ndarray
    mean_length: float = 30.0

    @classmethod
    def create(cls, vocab_size: int, rng: np.random.Generator, s: float = 1.0, mean_length: float = 30.0):
        return cls(tuple(make_vocabulary(vocab_size, rng)), zipf_weights(vocab_size, s), mean_length)

    def term_ids(self, rng: np.random.Generator) -> np.ndarray:
        n = int(rng.poisson(self.mean_length))
        return rng.choice(len(self.vocabulary), size=n, p=self.weights)

    def text(self, rng: np.random.Generator) -> str:
        return " ".join(self.vocabulary[i] for i in self.term_ids(rng))


def random_documents(
    n: int,
    rng: np.random.Generator,
    model: TextModel,
    start: date = EPOCH,
    span_days: int = 3650,
    first_id: int = 0,
    id_stride: int = 1,
) -> list[Document]:
    days = rng.integers(0, span_days, size=n)
    return [
        Document(
            first_id + i * id_stride,
            f"http://example.test/{first_id + i * id_stride}",
            start + timedelta(days=int(days[i])),
            model.text(rng),
        )
        for i in range(n)
    ]


def random_history(
    n_changes: int,
    rng: np.random.Generator,
    model: TextModel,
    start: date = EPOCH,
    span_days: int = 3650,
    p_modify: float = 0.2,
    p_delete: float = 0.1,
    p_readd: float = 0.1,
):
    """Random add/modify/delete events with non-decreasing dates.

    Returns a list of (kind, date, doc_id, Document | None) tuples with kind in
    {"add", "modify", "delete"}. Modify and delete always target a live doc;
    a fraction ``p_readd`` of adds reuse a previously deleted id.
    """
    days = np.sort(rng.integers(0, span_days, size=n_changes))
    live: list[int] = []
    dead: list[int] = []
    next_id = 0
    events = []
    for i in range(n_changes):
        when = start + timedelta(days=int(days[i]))
        u = rng.random()
        if live and u < p_delete:
            j = int(rng.integers(len(live)))
            doc_id = live[j]
            last = live.pop()
            if last != doc_id:
                live[j] = last
            dead.append(doc_id)
            events.append(("delete", when, doc_id, None))
            continue
        if live and u < p_delete + p_modify:
            doc_id = live[int(rng.integers(len(live)))]
            kind = "modify"
        else:
            kind = "add"
            if dead and rng.random() < p_readd:
                doc_id = dead.pop(int(rng.integers(len(dead))))
            else:
                doc_id = next_id
                next_id += 1
            live.append(doc_id)
        doc = Document(doc_id, f"http://example.test/{doc_id}", when, model.text(rng))
        events.append((kind, when, doc_id, doc))
    return events
