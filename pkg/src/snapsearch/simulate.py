"""Seeded workload simulation of centralized, date-sharded and broadcast search.

Costs are counted, not timed: a query costs the summed postings-list lengths
of its terms over every index it is scored against. Nothing here builds real
indexes; document frequencies come from arrays of term ids, and
``Workload.changes()`` materializes the same workload as a change log so the
counts can be checked against real indexes.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import timedelta
from functools import cached_property
from typing import Sequence

import numpy as np

from .corpus import EPOCH, Document
from .errors import ComparabilityError, ParameterError
from .synth import make_vocabulary, zipf_weights
from .updates.log import Change, ChangeKind, ChangeLog

NEVER = np.iinfo(np.int64).max
DAYS_PER_MONTH = 30.4375
HIT_BYTES = 12  # doc_id u64 + score f32


class SimMode(str, enum.Enum):
    CENTRALIZED = "centralized"
    DATE_SHARDED = "date"
    BROADCAST = "broadcast"


FLEET_POLICIES = ("uniform", "epoch", "current")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_clients: int = 100
    device_lifetime_days: float = 548.0
    queries_per_client_per_month: int = 4
    horizon_days: int = 3650
    docs_per_day: float = 2.0
    vocab_size: int = 2000
    zipf_s: float = 1.0
    mean_doc_length: float = 30.0
    modify_fraction: float = 0.1
    delete_fraction: float = 0.05
    granularity_days: int = 365
    mode: SimMode = SimMode.DATE_SHARDED
    k: int = 10
    # how client snapshot dates are drawn: uniform age over the device
    # lifetime, everyone at the epoch, or everyone current
    fleet_policy: str = "uniform"
    age_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", SimMode(self.mode))
        for name in ("n_clients", "queries_per_client_per_month", "horizon_days",
                     "vocab_size", "granularity_days", "k"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be a positive integer")
        for name in ("device_lifetime_days", "docs_per_day", "mean_doc_length", "zipf_s"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if not 0 <= self.modify_fraction <= 1 or not 0 <= self.delete_fraction <= 1:
            raise ParameterError("modify/delete fractions must be in [0, 1]")
        if self.age_scale < 0:
            raise ParameterError("age_scale must be non-negative")
        if self.fleet_policy not in FLEET_POLICIES:
            raise ParameterError(f"fleet_policy must be one of {FLEET_POLICIES}")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def workload_key(self) -> tuple:
        """Fields that determine the generated workload (everything but mode)."""
        d = asdict(self)
        d.pop("mode")
        return tuple(sorted(d.items()))


@dataclass(frozen=True)
class SimMetrics:
    postings_scored_datacentre: int
    postings_scored_clients: int
    bytes_transferred: int
    broadcast_bytes: int
    n_queries: int
    shards_touched: dict = field(default_factory=dict)  # shards per query -> query count
    shard_loads: tuple = ()  # queries per shard, oldest shard first


def sample_snapshot_age(device_lifetime: float, rng: np.random.Generator, size=None):
    """Age of a device's snapshot seen at a random instant: uniform on [0, lifetime)."""
    if not device_lifetime > 0:
        raise ParameterError("device lifetime must be positive")
    return rng.random(size) * device_lifetime


class Workload:
    """Document versions, client snapshot days and queries for one seed.

    Days are counted from the epoch; the corpus spans days [0, horizon) and
    queries are issued at the last day.
    """

    def __init__(self, config: SimConfig):
        self.config = config
        corpus_ss, fleet_ss, query_ss = np.random.SeedSequence(config.seed).spawn(3)
        self._generate_corpus(np.random.default_rng(corpus_ss))
        self._generate_fleet(np.random.default_rng(fleet_ss))
        self._generate_queries(np.random.default_rng(query_ss))

    # generation
    def _generate_corpus(self, rng):
        c = self.config
        horizon = c.horizon_days
        self.vocabulary = make_vocabulary(c.vocab_size, rng)
        n = int(round(c.docs_per_day * horizon))
        add = np.sort(rng.integers(0, horizon, size=n))
        modified = rng.random(n) < c.modify_fraction
        mod_day = add + (rng.random(n) * (horizon - add)).astype(np.int64)
        last = np.where(modified, mod_day, add)
        deleted = rng.random(n) < c.delete_fraction
        del_day = last + (rng.random(n) * (horizon - last)).astype(np.int64)

        doc = np.arange(n)
        first_end = np.where(modified, mod_day, np.where(deleted, del_day, NEVER))
        second_end = np.where(deleted, del_day, NEVER)
        self.v_doc = np.concatenate([doc, doc[modified]])
        self.v_start = np.concatenate([add, mod_day[modified]])
        self.v_end = np.concatenate([first_end, second_end[modified]])
        self.deletes = [(int(d), int(del_day[d])) for d in np.flatnonzero(deleted)]

        nv = len(self.v_doc)
        lengths = np.maximum(1, rng.poisson(c.mean_doc_length, size=nv))
        tokens = rng.choice(c.vocab_size, size=int(lengths.sum()), p=zipf_weights(c.vocab_size, c.zipf_s))
        self.v_offsets = np.concatenate([[0], np.cumsum(lengths)])
        self.tokens = tokens

        # (version, term) pairs with duplicates removed
        version_of_token = np.repeat(np.arange(nv), lengths)
        pairs = np.unique(version_of_token * c.vocab_size + tokens)
        pv = pairs // c.vocab_size
        pt = pairs % c.vocab_size
        self._pair_version = pv
        self._pair_term = pt

        # current versions, bucketed
        g = c.granularity_days
        current = self.v_end[pv] == NEVER
        buckets = self.v_start[pv[current]] // g
        live_versions = self.v_end == NEVER
        if live_versions.any():
            self.first_bucket = int(self.v_start[live_versions].min() // g)
            self.last_bucket = int(self.v_start[live_versions].max() // g)
        else:
            self.first_bucket = self.last_bucket = 0
        nb = self.last_bucket - self.first_bucket + 1
        df = np.zeros((nb, c.vocab_size), dtype=np.int64)
        np.add.at(df, (buckets - self.first_bucket, pt[current]), 1)
        self.bucket_df = df
        # suffix[b] = df summed over buckets b.. (relative), one spare zero row
        self.suffix_df = np.vstack([np.cumsum(df[::-1], axis=0)[::-1], np.zeros((1, c.vocab_size), np.int64)])
        self.current_df = self.suffix_df[0]

        # per-term sorted interval endpoints, for df at any past day
        order = np.lexsort((self.v_start[pv], pt))
        self._starts = self.v_start[pv][order]
        self._term_bounds = np.searchsorted(pt[order], np.arange(c.vocab_size + 1))
        order_e = np.lexsort((self.v_end[pv], pt))
        self._ends = self.v_end[pv][order_e]

    def _generate_fleet(self, rng):
        c = self.config
        today = c.horizon_days - 1
        ages = sample_snapshot_age(c.device_lifetime_days, rng, size=c.n_clients) * c.age_scale
        if c.fleet_policy == "uniform":
            days = np.maximum(0, today - np.floor(ages).astype(np.int64))
        elif c.fleet_policy == "epoch":
            days = np.zeros(c.n_clients, dtype=np.int64)
        else:
            days = np.full(c.n_clients, today, dtype=np.int64)
        self.today = today
        self.snapshot_days = days

    def _generate_queries(self, rng):
        c = self.config
        weights = zipf_weights(c.vocab_size, 1.0)
        n_per_client = c.queries_per_client_per_month  # a one-month query window
        self.queries: list[tuple[int, np.ndarray]] = []
        for client in range(c.n_clients):
            for _ in range(n_per_client):
                n_terms = int(rng.integers(1, 4))
                terms = rng.choice(c.vocab_size, size=n_terms, p=weights)
                _, first = np.unique(terms, return_index=True)
                self.queries.append((client, terms[np.sort(first)]))

    # derived quantities
    def df_at(self, term: int, day: int) -> int:
        """Documents containing ``term`` in the corpus as of ``day`` (changes dated <= day)."""
        lo, hi = self._term_bounds[term], self._term_bounds[term + 1]
        started = np.searchsorted(self._starts[lo:hi], day, side="right")
        ended = np.searchsorted(self._ends[lo:hi], day, side="right")
        return int(started - ended)

    def first_selected_bucket(self, snapshot_day: int) -> int:
        """Relative index of the oldest shard whose range ends after the snapshot."""
        b = snapshot_day // self.config.granularity_days - self.first_bucket
        return min(max(b, 0), self.bucket_df.shape[0])

    def version_text(self, v: int) -> str:
        ids = self.tokens[self.v_offsets[v]:self.v_offsets[v + 1]]
        return " ".join(self.vocabulary[i] for i in ids)

    def date_of(self, day: int):
        return EPOCH + timedelta(days=int(day))

    def changes(self) -> list[Change]:
        """The workload as a date-ordered list of changes (without seqs)."""
        events = []
        seen = set()
        for v in np.argsort(self.v_start, kind="stable"):
            d = int(self.v_doc[v])
            kind = ChangeKind.MODIFY if d in seen else ChangeKind.ADD
            seen.add(d)
            events.append((int(self.v_start[v]), 0 if kind is ChangeKind.ADD else 1, d, kind, int(v)))
        for d, day in self.deletes:
            events.append((day, 2, d, ChangeKind.DELETE, -1))
        events.sort(key=lambda e: e[:3])
        out = []
        for day, _, d, kind, v in events:
            when = self.date_of(day)
            payload = None
            if kind is not ChangeKind.DELETE:
                payload = Document(d, f"http://example.test/{d}", when, self.version_text(v))
            out.append(Change(kind, when, d, payload))
        return out

    @cached_property
    def change_log_bytes(self) -> int:
        log = ChangeLog()
        log.extend(self.changes())
        return log.size_bytes

    def request_bytes(self, terms) -> int:
        # terms separated by one byte, plus a 4-byte snapshot day
        return sum(len(self.vocabulary[t].encode()) + 1 for t in terms) + 4


def prepare(config: SimConfig) -> Workload:
    return Workload(config)


def run(config: SimConfig, workload: Workload | None = None) -> SimMetrics:
    if workload is None:
        workload = prepare(config)
    elif workload.config.workload_key() != config.workload_key():
        raise ComparabilityError("workload was generated from a different config")
    w = workload
    nb = w.bucket_df.shape[0]
    dc = client = nbytes = 0
    touched: Counter = Counter()
    loads = np.zeros(nb, dtype=np.int64)
    response = HIT_BYTES * config.k
    for who, terms in w.queries:
        if config.mode is SimMode.CENTRALIZED:
            dc += int(w.current_df[terms].sum())
            nbytes += w.request_bytes(terms) + response
            touched[nb] += 1
            loads += 1
        elif config.mode is SimMode.DATE_SHARDED:
            snap = int(w.snapshot_days[who])
            first = w.first_selected_bucket(snap)
            dc += int(w.suffix_df[first][terms].sum())
            client += sum(w.df_at(int(t), snap) for t in terms)
            nbytes += w.request_bytes(terms) + response
            touched[nb - first] += 1
            loads[first:] += 1
        else:
            client += int(w.current_df[terms].sum())
    broadcast = w.change_log_bytes * config.n_clients if config.mode is SimMode.BROADCAST else 0
    return SimMetrics(
        postings_scored_datacentre=int(dc),
        postings_scored_clients=int(client),
        bytes_transferred=int(nbytes),
        broadcast_bytes=int(broadcast),
        n_queries=len(w.queries),
        shards_touched=dict(sorted(touched.items())),
        shard_loads=tuple(int(x) for x in loads) if config.mode is not SimMode.BROADCAST else (0,) * nb,
    )


REPORT_COLUMNS = [
    "mode", "seed", "n_clients", "horizon_days", "postings_dc",
    "postings_client", "bytes", "broadcast_bytes", "dc_cost_ratio",
]


def compare(configs: Sequence[SimConfig]) -> list[dict]:
    """Run configs that differ only in mode over one shared workload.

    ``dc_cost_ratio`` is each mode's datacentre cost over the centralized cost.
    """
    if not configs:
        return []
    base = configs[0]
    for c in configs[1:]:
        if c.seed != base.seed:
            raise ComparabilityError(f"seeds differ ({base.seed} vs {c.seed})")
        if c.workload_key() != base.workload_key():
            raise ComparabilityError("configs differ in more than mode")
    workload = prepare(base)
    central = run(replace(base, mode=SimMode.CENTRALIZED), workload).postings_scored_datacentre
    rows = []
    for c in configs:
        m = run(c, workload)
        ratio = m.postings_scored_datacentre / central if central else (1.0 if not m.postings_scored_datacentre else math.inf)
        rows.append({
            "mode": c.mode.value,
            "seed": c.seed,
            "n_clients": c.n_clients,
            "horizon_days": c.horizon_days,
            "postings_dc": m.postings_scored_datacentre,
            "postings_client": m.postings_scored_clients,
            "bytes": m.bytes_transferred,
            "broadcast_bytes": m.broadcast_bytes,
            "dc_cost_ratio": ratio,
        })
    return rows


def report_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({**row, "dc_cost_ratio": repr(float(row["dc_cost_ratio"]))})
    return buf.getvalue()
