from .codec import decode_vbyte, delta_decode, delta_encode, encode_vbyte
from .inverted import (
    CollectionStats,
    DocEntry,
    Hit,
    Index,
    Posting,
    PostingsList,
    SearchResult,
    build_index,
    search,
)
from .ranking import score
from .storage import from_bytes, index_ratio, read_index, to_bytes, write_index

__all__ = [
    "CollectionStats",
    "DocEntry",
    "Hit",
    "Index",
    "Posting",
    "PostingsList",
    "SearchResult",
    "build_index",
    "decode_vbyte",
    "delta_decode",
    "delta_encode",
    "encode_vbyte",
    "from_bytes",
    "index_ratio",
    "read_index",
    "score",
    "search",
    "to_bytes",
    "write_index",
]
