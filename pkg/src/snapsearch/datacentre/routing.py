"""Snapshot-aware query routing and result merging."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ..errors import IntegrityError, ParameterError, ShardUnavailableError, UnsupportedModeError
from ..index import CollectionStats, Index, SearchResult, search
from ..index.inverted import Hit
from ..updates.log import Change, ChangeLog
from .topology import ShardingMode, ShardTopology


class ClientSnapshot(NamedTuple):
    index: Index
    snapshot_date: date


@dataclass(frozen=True)
class QueryPlan:
    terms: tuple[str, ...]
    snapshot_date: date | None
    selected_shards: frozenset[int]
    include_local: bool
    mode: ShardingMode = ShardingMode.DATE


def shards_after(snapshot_date: date, topology: ShardTopology) -> set[int]:
    """Shards that may hold documents modified after ``snapshot_date``."""
    if topology.mode is not ShardingMode.DATE:
        raise UnsupportedModeError("date routing needs a date-sharded topology")
    return {sid for sid, s in topology.shards.items() if s.range_end > snapshot_date}


def global_stats(topology: ShardTopology, client_stats: CollectionStats | None = None) -> CollectionStats:
    """Statistics of the current corpus, as held by the datacentre.

    The datacentre is authoritative; ``client_stats`` is accepted so callers
    can pass what they have, but it never changes the answer.
    """
    return topology.stats


def _changes(change_log) -> Iterable[Change]:
    if isinstance(change_log, ChangeLog):
        return change_log.replay(1) if change_log.head_seq else []
    return change_log


def supersede_since(snapshot_date: date, change_log) -> frozenset[int]:
    """doc_ids touched by any change dated strictly after ``snapshot_date``."""
    return frozenset(c.doc_id for c in _changes(change_log) if c.date > snapshot_date)


class SupersedeIndex:
    """Answers supersede_since for many snapshot dates from one log pass."""

    def __init__(self, changes: Iterable[Change]):
        changes = list(changes)
        self._days = [c.date.toordinal() for c in changes]
        if any(a > b for a, b in zip(self._days, self._days[1:])):
            order = sorted(range(len(changes)), key=lambda i: self._days[i])
            changes = [changes[i] for i in order]
            self._days = [self._days[i] for i in order]
        self._ids = [c.doc_id for c in changes]
        self._cache: dict[date, frozenset[int]] = {}

    def since(self, snapshot_date: date) -> frozenset[int]:
        got = self._cache.get(snapshot_date)
        if got is None:
            start = bisect.bisect_right(self._days, snapshot_date.toordinal())
            got = self._cache[snapshot_date] = frozenset(self._ids[start:])
        return got


def plan_query(query: Sequence[str], snapshot_date: date | None, topology: ShardTopology) -> QueryPlan:
    """Date mode: the client's snapshot plus every newer shard.
    Random mode: every shard, the client snapshot plays no part."""
    terms = tuple(query)
    if topology.mode is ShardingMode.DATE and snapshot_date is not None:
        selected = shards_after(snapshot_date, topology)
        return QueryPlan(terms, snapshot_date, frozenset(selected), True, topology.mode)
    return QueryPlan(terms, snapshot_date, frozenset(topology.shards), False, topology.mode)


def shed_load(plan: QueryPlan, keep_fraction: float, seed: int = 0) -> QueryPlan:
    """Keep a seeded random subset of ceil(keep_fraction * n) shards.

    Shards are ranked by one seeded shuffle, so for a fixed seed a smaller
    fraction keeps a prefix of what a larger one keeps.
    """
    if plan.mode is not ShardingMode.RANDOM:
        raise UnsupportedModeError("load shedding would break date-sharded equivalence")
    if not 0.0 < keep_fraction <= 1.0:
        raise ParameterError("keep_fraction must be in (0, 1]")
    shards = sorted(plan.selected_shards)
    if not shards:
        return plan
    keep = max(1, math.ceil(keep_fraction * len(shards) - 1e-9))
    ranked = np.random.default_rng(seed).permutation(len(shards))
    chosen = frozenset(shards[i] for i in ranked[:keep])
    return replace(plan, selected_shards=chosen)


def merge(partials: Sequence[SearchResult], k: int) -> SearchResult:
    """Global top-k under (score desc, doc_id asc)."""
    seen: set[int] = set()
    hits = []
    for part in partials:
        for h in part:
            if h.doc_id in seen:
                raise IntegrityError(f"doc {h.doc_id} returned by more than one partial result")
            seen.add(h.doc_id)
            hits.append(h)
    hits.sort(key=lambda h: (-h.score, h.doc_id))
    return SearchResult(tuple(Hit(*h) for h in hits[:k]))


def execute_query(
    query: Sequence[str],
    k: int,
    client: ClientSnapshot | tuple[Index, date] | None,
    topology: ShardTopology,
    change_log=None,
    *,
    plan: QueryPlan | None = None,
    supersede: frozenset[int] | None = None,
) -> SearchResult:
    """Answer ``query`` for a client holding an index of the corpus at its snapshot date.

    The client searches its own snapshot minus superseded documents; the
    datacentre searches the shards newer than the snapshot, keeping only
    documents modified after it. Everything is scored with the datacentre's
    statistics, so the merged list equals a search of one index over the
    current corpus.
    """
    snapshot_index = snapshot_date = None
    if client is not None:
        snapshot_index, snapshot_date = client
    if plan is None:
        plan = plan_query(query, snapshot_date, topology)
    stats = global_stats(topology)
    partials = []
    if plan.include_local and snapshot_index is not None:
        if supersede is None:
            supersede = supersede_since(snapshot_date, change_log if change_log is not None else [])
        partials.append(search(snapshot_index, query, k, stats, exclude=supersede or None))
    newer_than = snapshot_date if plan.include_local else None
    for sid in sorted(plan.selected_shards):
        shard = topology.shards.get(sid)
        if shard is None or not shard.available or shard.index is None:
            raise ShardUnavailableError(sid)
        partials.append(search(shard.index, query, k, stats, newer_than=newer_than))
    return merge(partials, k)


class DataCentre:
    """A topology plus its change log, caching per-snapshot supersede sets."""

    def __init__(self, topology: ShardTopology, change_log=()):
        self.topology = topology
        self._supersede = SupersedeIndex(_changes(change_log))

    @property
    def stats(self) -> CollectionStats:
        return self.topology.stats

    def supersede_since(self, snapshot_date: date) -> frozenset[int]:
        return self._supersede.since(snapshot_date)

    def plan(self, query: Sequence[str], snapshot_date: date | None) -> QueryPlan:
        return plan_query(query, snapshot_date, self.topology)

    def query(self, query, k, client=None, *, plan=None) -> SearchResult:
        supersede = None
        if client is not None and self.topology.mode is ShardingMode.DATE:
            supersede = self.supersede_since(client[1])
        return execute_query(query, k, client, self.topology, plan=plan, supersede=supersede)
