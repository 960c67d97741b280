"""BM25 with fixed constants k1 = 0.9, b = 0.4.

``score`` and ``term_weights`` evaluate the same expression in the same
operation order so the vectorised path is bit-identical to the scalar one.
"""

from __future__ import annotations

import math

import numpy as np

K1 = 0.9
B = 0.4


def idf(df: int, n_docs: int) -> float:
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def score(df: int, n_docs: int, avg_doclen: float, tf: int, doclen: int) -> float:
    """Contribution of one term occurring ``tf`` times in a document of ``doclen`` terms."""
    if df < 1 or n_docs < df:
        raise ValueError(f"need 1 <= df <= N, got df={df} N={n_docs}")
    if tf < 1 or doclen < 1:
        raise ValueError("tf and doclen must be positive")
    norm = 1.0 - B + B * doclen / avg_doclen
    return idf(df, n_docs) * (tf * (K1 + 1.0) / (tf + K1 * norm))


def term_weights(term_idf: float, avg_doclen: float, tf: int, doclens: np.ndarray) -> np.ndarray:
    """Vectorised ``score`` for one tf group over an array of document lengths."""
    norm = 1.0 - B + B * doclens / avg_doclen
    return term_idf * (tf * (K1 + 1.0) / (tf + K1 * norm))
