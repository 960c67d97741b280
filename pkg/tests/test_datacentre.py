import io
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import history_changes, random_queries
from snapsearch.corpus import EPOCH, Document
from snapsearch.datacentre import (
    ClientSnapshot,
    DataCentre,
    ShardingMode,
    SupersedeIndex,
    assign_shard,
    bucket_of,
    bucket_range,
    build_topology,
    execute_query,
    global_stats,
    load_topology,
    merge,
    plan_query,
    save_topology,
    shards_after,
    shed_load,
    supersede_since,
)
from snapsearch.errors import IntegrityError, ParameterError, ShardUnavailableError, UnsupportedModeError
from snapsearch.index import SearchResult, build_index, search
from snapsearch.index.inverted import Hit
from snapsearch.synth import TextModel, random_documents
from snapsearch.updates import Change, ChangeKind, ChangeLog, state_at


def doc(doc_id, when, text="a b c"):
    return Document(doc_id, f"u{doc_id}", when, text)


@pytest.fixture(scope="module")
def year_shards():
    """Year shards holding documents from 2021 to 2026."""
    rng = np.random.default_rng(20)
    model = TextModel.create(300, rng)
    start = date(2021, 1, 1)
    span = (bucket_range(36)[1] - start).days
    docs = random_documents(600, rng, model, start=start, span_days=span)
    return build_topology(docs), docs, model


# sharding

def test_assign_shard_examples():
    assert assign_shard(doc(0, EPOCH), 365) == 0
    assert assign_shard(doc(0, date(2026, 3, 1)), 365) == 36
    start, end = bucket_range(36)
    assert start <= date(2026, 3, 1) < end
    assert bucket_of(start) == 36 and bucket_of(end) == 37


@given(st.integers(1, 1000), st.dates(EPOCH, date(2100, 12, 31)))
def test_date_lies_in_its_bucket(granularity, when):
    start, end = bucket_range(bucket_of(when, granularity), granularity)
    assert start <= when < end
    assert (end - start).days == granularity


def test_buckets_partition_the_corpus(year_shards):
    topology, docs, _ = year_shards
    owners = {}
    for sid, shard in topology.shards.items():
        for d in shard.modified_docids:
            assert d not in owners
            owners[d] = sid
    assert set(owners) == {d.doc_id for d in docs}
    for d in docs:
        s = topology.shards[owners[d.doc_id]]
        assert s.range_start <= d.modified_date < s.range_end
    ranges = [(s.range_start, s.range_end) for _, s in sorted(topology.shards.items())]
    assert all(a[1] == b[0] for a, b in zip(ranges, ranges[1:]))


def test_random_sharding_partitions_and_is_seeded():
    rng = np.random.default_rng(1)
    docs = random_documents(100, rng, TextModel.create(50, rng))
    a = build_topology(docs, mode="random", n_shards=4, seed=3)
    b = build_topology(docs, mode=ShardingMode.RANDOM, n_shards=4, seed=3)
    ids = [d for s in a.shards.values() for d in s.modified_docids]
    assert sorted(ids) == sorted(d.doc_id for d in docs)
    assert {k: s.modified_docids for k, s in a.shards.items()} == {k: s.modified_docids for k, s in b.shards.items()}
    sizes = [len(s.modified_docids) for s in a.shards.values()]
    assert max(sizes) - min(sizes) <= 1


def test_duplicate_doc_ids_rejected():
    with pytest.raises(IntegrityError):
        build_topology([doc(1, EPOCH), doc(1, date(2000, 1, 1))])


# routing

def test_shards_after_epoch_selects_everything(year_shards):
    topology, _, _ = year_shards
    assert shards_after(EPOCH, topology) == set(topology.shards)


def test_year_shard_routing(year_shards):
    topology, _, _ = year_shards
    year_shard = {y: bucket_of(date(y, 6, 1)) for y in range(2021, 2027)}
    assert shards_after(date(2025, 12, 31), topology) == {year_shard[2026]}
    assert shards_after(date(2023, 12, 31), topology) == {year_shard[y] for y in (2024, 2025, 2026)}


def test_shards_after_needs_date_mode():
    topology = build_topology([doc(1, EPOCH)], mode="random", n_shards=2)
    with pytest.raises(UnsupportedModeError):
        shards_after(EPOCH, topology)


@given(st.dates(date(2020, 1, 1), date(2028, 1, 1)), st.dates(date(2020, 1, 1), date(2028, 1, 1)))
def test_routing_monotone_in_snapshot_age(year_shards, a, b):
    topology, _, _ = year_shards
    older, newer = sorted((a, b))
    assert shards_after(older, topology) >= shards_after(newer, topology)


def test_plan_query(year_shards):
    topology, _, _ = year_shards
    plan = plan_query(["a"], date(2025, 12, 31), topology)
    assert plan.include_local and plan.selected_shards == frozenset(shards_after(date(2025, 12, 31), topology))
    central = plan_query(["a"], None, topology)
    assert not central.include_local and central.selected_shards == frozenset(topology.shards)


# statistics authority

def test_global_stats_single_shard():
    docs = [doc(1, date(2000, 2, 1)), doc(2, date(2000, 3, 1), "x y")]
    topology = build_topology(docs, granularity_days=3650)
    assert len(topology.shards) == 1
    assert global_stats(topology) == build_index(docs).stats


def test_global_stats_two_disjoint_shards():
    a = [doc(1, date(2000, 1, 5), "p q"), doc(2, date(2000, 1, 6), "p")]
    b = [doc(3, date(2003, 1, 5), "p r r")]
    stats = global_stats(build_topology(a + b))
    sa, sb = build_index(a).stats, build_index(b).stats
    assert stats.N == sa.N + sb.N
    assert stats.df == {"p": 3, "q": 1, "r": 1}


def test_global_stats_equal_monolithic(year_shards):
    topology, docs, _ = year_shards
    assert global_stats(topology) == build_index(docs).stats
    client_stats = build_index(docs[:10]).stats
    assert global_stats(topology, client_stats) == build_index(docs).stats


# supersede sets

def test_supersede_examples():
    changes = [
        Change(ChangeKind.ADD, date(2000, 1, 1), 7, doc(7, date(2000, 1, 1))),
        Change(ChangeKind.MODIFY, date(2001, 1, 1), 7, doc(7, date(2001, 1, 1))),
    ]
    assert supersede_since(date(2001, 1, 1), changes) == frozenset()
    assert supersede_since(date(2000, 6, 1), changes) == {7}


def test_supersede_matches_scan_and_index():
    rng = np.random.default_rng(3)
    changes = history_changes(800, rng, TextModel.create(100, rng), span_days=2000)
    log = ChangeLog()
    log.extend(changes)
    fast = SupersedeIndex(changes)
    for day in rng.integers(-10, 2010, size=50):
        when = EPOCH + timedelta(days=int(day))
        expected = {c.doc_id for c in changes if c.date > when}
        assert supersede_since(when, changes) == expected
        assert supersede_since(when, log) == expected
        assert fast.since(when) == expected


# query execution

def _triple(seed, n_changes=600, granularity=365):
    rng = np.random.default_rng(seed)
    model = TextModel.create(200, rng)
    changes = history_changes(n_changes, rng, model, span_days=1500)
    return rng, model, changes


def test_current_snapshot_touches_only_newest_bucket():
    rng, model, changes = _triple(1)
    current = list(state_at(changes).values())
    topology = build_topology(current)
    today = changes[-1].date
    plan = plan_query(["x"], today, topology)
    assert plan.selected_shards == {max(topology.shards)}
    client = ClientSnapshot(build_index(current), today)
    monolith = build_index(current)
    for q in random_queries(rng, model.vocabulary, 50):
        assert execute_query(q, 10, client, topology, changes) == search(monolith, q, 10)


def test_epoch_snapshot_with_empty_client_is_centralized():
    rng, model, changes = _triple(2)
    current = list(state_at(changes).values())
    topology = build_topology(current)
    client = ClientSnapshot(build_index([]), EPOCH)
    monolith = build_index(current)
    for q in random_queries(rng, model.vocabulary, 50):
        assert execute_query(q, 10, client, topology, changes) == search(monolith, q, 10)
        assert execute_query(q, 10, None, topology) == search(monolith, q, 10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 1600), st.sampled_from([30, 200, 365]), st.sampled_from([1, 7, 1000]))
def test_equivalence_property(seed, snap_day, granularity, k):
    rng, model, changes = _triple(seed, n_changes=300)
    snapshot = EPOCH + timedelta(days=snap_day)
    current = list(state_at(changes).values())
    client = ClientSnapshot(build_index(state_at(changes, snapshot).values()), snapshot)
    dc = DataCentre(build_topology(current, granularity), changes)
    monolith = build_index(current)
    for q in random_queries(rng, model.vocabulary, 20):
        assert dc.query(q, k, client) == search(monolith, q, k)


def test_random_mode_queries_ignore_client_snapshot():
    rng, model, changes = _triple(4)
    current = list(state_at(changes).values())
    topology = build_topology(current, mode="random", n_shards=5, seed=9)
    monolith = build_index(current)
    stale = ClientSnapshot(build_index(state_at(changes, EPOCH + timedelta(days=300)).values()), EPOCH + timedelta(days=300))
    for q in random_queries(rng, model.vocabulary, 30):
        assert execute_query(q, 10, stale, topology, changes) == search(monolith, q, 10)


def test_missing_shard_is_an_error(year_shards):
    topology, docs, _ = year_shards
    newest = max(topology.shards)
    broken = topology.with_unavailable([newest])
    client = ClientSnapshot(build_index(docs), date(2026, 6, 1))
    with pytest.raises(ShardUnavailableError):
        execute_query(["a"], 10, client, broken, [])
    older = min(topology.shards)
    ok = topology.with_unavailable([older])
    execute_query(["a"], 10, client, ok, [])


def test_retirement_never_changes_fleet_results():
    rng, model, changes = _triple(5, n_changes=800)
    current = list(state_at(changes).values())
    topology = build_topology(current, 200)
    snapshots = [EPOCH + timedelta(days=int(d)) for d in rng.integers(900, 1500, size=6)]
    oldest = min(snapshots)
    retired = {s for s, sh in topology.shards.items() if sh.range_end <= oldest}
    assert retired
    slim = topology.retire(retired)
    assert slim.stats == topology.stats
    full_dc = DataCentre(topology, changes)
    slim_dc = DataCentre(slim, changes)
    for snap in snapshots:
        client = ClientSnapshot(build_index(state_at(changes, snap).values()), snap)
        for q in random_queries(rng, model.vocabulary, 20):
            assert slim_dc.query(q, 10, client) == full_dc.query(q, 10, client)


# merging

def test_merge_examples():
    assert len(merge([SearchResult(), SearchResult()], 5)) == 0
    one = SearchResult((Hit(3, 2.0), Hit(1, 1.0)))
    assert merge([one], 5) == one
    assert merge([one], 1).doc_ids == [3]


def test_merge_rejects_duplicates():
    with pytest.raises(IntegrityError):
        merge([SearchResult((Hit(1, 1.0),)), SearchResult((Hit(1, 0.5),))], 5)


@given(
    st.lists(st.tuples(st.integers(0, 60), st.sampled_from([0.5, 1.0, 1.5, 2.25])), unique_by=lambda t: t[0], max_size=40),
    st.integers(1, 5),
    st.integers(1, 50),
)
def test_merge_matches_sort_oracle(hits, parts, k):
    chunks = [[] for _ in range(parts)]
    for i, (d, s) in enumerate(hits):
        chunks[i % parts].append(Hit(d, s))
    partials = [SearchResult(tuple(sorted(c, key=lambda h: (-h.score, h.doc_id)))) for c in chunks]
    expected = sorted(hits, key=lambda t: (-t[1], t[0]))[:k]
    assert [(h.doc_id, h.score) for h in merge(partials, k)] == expected


# load shedding

def _random_topology(seed=6):
    rng = np.random.default_rng(seed)
    model = TextModel.create(300, rng)
    docs = random_documents(1500, rng, model)
    return rng, model, docs, build_topology(docs, mode="random", n_shards=10, seed=seed)


def test_shed_load_examples():
    _, _, _, topology = _random_topology()
    plan = plan_query(["a"], None, topology)
    assert shed_load(plan, 1.0, seed=1) == plan
    assert len(shed_load(plan, 1e-9, seed=1).selected_shards) == 1
    assert len(shed_load(plan, 0.35, seed=1).selected_shards) == 4
    assert shed_load(plan, 0.5, seed=2) == shed_load(plan, 0.5, seed=2)
    with pytest.raises(ParameterError):
        shed_load(plan, 0.0)


def test_shed_load_refuses_date_mode(year_shards):
    topology, _, _ = year_shards
    with pytest.raises(UnsupportedModeError):
        shed_load(plan_query(["a"], None, topology), 0.5)


def test_recall_falls_as_more_is_shed():
    rng, model, docs, topology = _random_topology()
    queries = random_queries(rng, model.vocabulary, 100)
    recalls = []
    for keep in (1.0, 0.8, 0.6, 0.4, 0.2, 0.1):
        total = 0.0
        for i, q in enumerate(queries):
            full = set(execute_query(q, 10, None, topology).doc_ids)
            plan = shed_load(plan_query(q, None, topology), keep, seed=i)
            got = set(execute_query(q, 10, None, topology, plan=plan).doc_ids)
            total += len(full & got) / len(full) if full else 1.0
        recalls.append(total / len(queries))
    assert recalls[0] == 1.0
    assert all(a >= b for a, b in zip(recalls, recalls[1:]))


# persistence

def test_topology_round_trip(tmp_path, year_shards):
    topology, _, _ = year_shards
    retired = topology.retire([min(topology.shards)])
    manifest = save_topology(retired, tmp_path / "topo")
    back = load_topology(manifest)
    assert back.shard_ids == retired.shard_ids
    assert back.stats == retired.stats
    for sid in back.shard_ids:
        a, b = back.shards[sid], retired.shards[sid]
        assert (a.range_start, a.range_end, a.retired) == (b.range_start, b.range_end, b.retired)
        assert a.index == b.index


def test_routing_csv(year_shards):
    from snapsearch.datacentre import FleetDistribution, expected_shard_load, plan_replicas, write_routing_csv

    topology, _, _ = year_shards
    fleet = FleetDistribution.from_snapshots([date(2025, 12, 31), date(2023, 12, 31)])
    loads = expected_shard_load(fleet, topology)
    buf = io.StringIO()
    write_routing_csv(buf, topology, loads, plan_replicas(loads, 8))
    lines = buf.getvalue().splitlines()
    assert lines[0] == "shard_id,range_start,range_end,expected_load,replicas"
    assert len(lines) == 1 + len(topology.shards)
