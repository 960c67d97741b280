"""Shards, sharding modes, and the topology manifest."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from datetime import date, timedelta
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from ..corpus import EPOCH, Document
from ..errors import CodecError, IntegrityError, ParameterError, SnapSearchError
from ..index import CollectionStats, Index, build_index, read_index, write_index

DEFAULT_GRANULARITY = 365


class ShardingMode(str, enum.Enum):
    DATE = "date"
    RANDOM = "random"


def assign_shard(doc: Document, granularity_days: int = DEFAULT_GRANULARITY) -> int:
    return bucket_of(doc.modified_date, granularity_days)


def bucket_of(when: date, granularity_days: int = DEFAULT_GRANULARITY) -> int:
    if granularity_days < 1:
        raise ParameterError("granularity_days must be positive")
    return (when - EPOCH).days // granularity_days


def bucket_range(bucket: int, granularity_days: int = DEFAULT_GRANULARITY) -> tuple[date, date]:
    """[start, end) dates covered by a date bucket."""
    start = EPOCH + timedelta(days=bucket * granularity_days)
    return start, start + timedelta(days=granularity_days)


@dataclass(frozen=True)
class Shard:
    shard_id: int
    index: Index | None
    range_start: date | None = None
    range_end: date | None = None
    available: bool = True
    # stats are kept even after the postings are dropped by retirement
    stats: CollectionStats | None = None

    def __post_init__(self):
        if self.stats is None and self.index is not None:
            object.__setattr__(self, "stats", self.index.stats)

    @property
    def retired(self) -> bool:
        return self.index is None

    @property
    def modified_docids(self) -> frozenset[int]:
        return frozenset(self.index.doc_table) if self.index is not None else frozenset()


@dataclass(frozen=True)
class ShardTopology:
    """An immutable epoch of the datacentre. Apply changes by building a new one."""

    shards: Mapping[int, Shard]
    granularity_days: int = DEFAULT_GRANULARITY
    mode: ShardingMode = ShardingMode.DATE
    seed: int = 0

    @cached_property
    def stats(self) -> CollectionStats:
        return CollectionStats.combine(s.stats for s in self.shards.values())

    @property
    def shard_ids(self) -> list[int]:
        return sorted(self.shards)

    def retire(self, shard_ids: Iterable[int]) -> "ShardTopology":
        """Drop postings of the given shards, keeping their statistics."""
        shards = dict(self.shards)
        for sid in shard_ids:
            shards[sid] = replace(shards[sid], index=None)
        return replace(self, shards=shards)

    def with_unavailable(self, shard_ids: Iterable[int]) -> "ShardTopology":
        shards = dict(self.shards)
        for sid in shard_ids:
            shards[sid] = replace(shards[sid], available=False)
        return replace(self, shards=shards)


def build_topology(
    docs: Iterable[Document],
    granularity_days: int = DEFAULT_GRANULARITY,
    mode: ShardingMode = ShardingMode.DATE,
    n_shards: int = 8,
    seed: int = 0,
    retired: Iterable[int] = (),
) -> ShardTopology:
    """Shard the current corpus.

    Date mode creates one shard per bucket from the oldest to the newest
    document (empty buckets included, so ranges are contiguous). Random mode
    deals a seeded permutation of the documents round-robin over ``n_shards``.
    Buckets listed in ``retired`` keep statistics only.
    """
    docs = list(docs)
    seen: set[int] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise IntegrityError(f"duplicate doc_id {doc.doc_id}")
        seen.add(doc.doc_id)
    mode = ShardingMode(mode)
    groups: dict[int, list[Document]] = {}
    if mode is ShardingMode.DATE:
        for doc in docs:
            groups.setdefault(assign_shard(doc, granularity_days), []).append(doc)
        if groups:
            for b in range(min(groups), max(groups) + 1):
                groups.setdefault(b, [])
    else:
        if n_shards < 1:
            raise ParameterError("n_shards must be positive")
        order = sorted(docs, key=lambda d: d.doc_id)
        perm = np.random.default_rng(seed).permutation(len(order))
        groups = {s: [] for s in range(n_shards)}
        for slot, i in enumerate(perm):
            groups[slot % n_shards].append(order[i])
    retired = set(retired)
    shards = {}
    for sid, members in sorted(groups.items()):
        start = end = None
        if mode is ShardingMode.DATE:
            start, end = bucket_range(sid, granularity_days)
        index = build_index(members)
        shard = Shard(sid, index, start, end)
        if sid in retired:
            shard = replace(shard, index=None)
        shards[sid] = shard
    return ShardTopology(shards, granularity_days, mode, seed)


# manifest I/O

def _stats_record(stats: CollectionStats) -> dict:
    return {"N": stats.N, "total_terms": stats.total_terms, "df": dict(sorted(stats.df.items()))}


def save_topology(topology: ShardTopology, directory: str | Path) -> Path:
    """Write shard index files, doc-id lists and ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for sid in topology.shard_ids:
        shard = topology.shards[sid]
        entry = {
            "shard_id": sid,
            "range_start": shard.range_start.isoformat() if shard.range_start else None,
            "range_end": shard.range_end.isoformat() if shard.range_end else None,
            "available": shard.available,
            "index_path": None,
            "modified_docids_path": None,
        }
        if shard.index is not None:
            idx_name = f"shard-{sid:05d}.idx"
            ids_name = f"shard-{sid:05d}.docids.json"
            write_index(shard.index, directory / idx_name)
            (directory / ids_name).write_text(json.dumps(sorted(shard.modified_docids)))
            entry["index_path"] = idx_name
            entry["modified_docids_path"] = ids_name
        else:
            entry["stats"] = _stats_record(shard.stats)
        entries.append(entry)
    manifest = {
        "granularity_days": topology.granularity_days,
        "mode": topology.mode.value,
        "seed": topology.seed,
        "shards": entries,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_topology(manifest_path: str | Path) -> ShardTopology:
    manifest_path = Path(manifest_path)
    try:
        return _load_topology(manifest_path)
    except SnapSearchError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CodecError(f"{manifest_path}: malformed manifest ({type(exc).__name__}: {exc})") from None


def _load_topology(manifest_path: Path) -> ShardTopology:
    base = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    shards = {}
    for entry in manifest["shards"]:
        sid = entry["shard_id"]
        start = date.fromisoformat(entry["range_start"]) if entry["range_start"] else None
        end = date.fromisoformat(entry["range_end"]) if entry["range_end"] else None
        if entry["index_path"] is not None:
            index = read_index(base / entry["index_path"])
            ids = json.loads((base / entry["modified_docids_path"]).read_text())
            if sorted(index.doc_table) != ids:
                raise IntegrityError(f"shard {sid}: doc-id list disagrees with index", manifest_path)
            shard = Shard(sid, index, start, end, entry.get("available", True))
        else:
            st = entry["stats"]
            shard = Shard(
                sid, None, start, end, entry.get("available", True),
                CollectionStats(st["N"], st["total_terms"], st["df"]),
            )
        shards[sid] = shard
    return ShardTopology(
        shards, manifest["granularity_days"], ShardingMode(manifest["mode"]), manifest.get("seed", 0)
    )
