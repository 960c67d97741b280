"""Fleet snapshot distributions, shard loads, replicas and retirement."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import IO, Iterable, Mapping

from ..errors import InfeasibleBudgetError, ParameterError, UnsupportedModeError
from .topology import ShardingMode, ShardTopology


@dataclass(frozen=True)
class FleetDistribution:
    """Snapshot dates held by the fleet, with the share of clients at each.

    ``clients`` scales per-client rates up to fleet totals.
    """

    snapshot_dates: tuple[date, ...]
    weights: tuple[float, ...]
    clients: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "snapshot_dates", tuple(self.snapshot_dates))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.snapshot_dates) != len(self.weights):
            raise ParameterError("one weight per snapshot date")
        if any(not w > 0 for w in self.weights):
            raise ParameterError("weights must be positive")
        if self.weights and abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ParameterError("weights must sum to 1")

    @classmethod
    def from_snapshots(cls, dates: Iterable[date]) -> "FleetDistribution":
        """One entry per client, equally weighted."""
        counts: dict[date, int] = {}
        for d in dates:
            counts[d] = counts.get(d, 0) + 1
        n = sum(counts.values())
        keys = sorted(counts)
        weights = [counts[d] / n for d in keys]
        # absorb rounding so the sum is exactly 1 within tolerance
        if weights:
            weights[-1] = 1.0 - math.fsum(weights[:-1])
        return cls(tuple(keys), tuple(weights), float(n))

    @property
    def oldest(self) -> date:
        return min(self.snapshot_dates)


def expected_shard_load(
    fleet: FleetDistribution, topology: ShardTopology, per_client_query_rate: float = 1.0
) -> dict[int, float]:
    if topology.mode is not ShardingMode.DATE:
        raise UnsupportedModeError("shard loads are defined for date sharding")
    total = per_client_query_rate * fleet.clients
    loads = {}
    for sid, shard in sorted(topology.shards.items()):
        share = math.fsum(w for d, w in zip(fleet.snapshot_dates, fleet.weights) if d < shard.range_end)
        loads[sid] = total * share
    return loads


@dataclass(frozen=True)
class ReplicaAllocation:
    replicas: Mapping[int, int]
    budget: int

    def __getitem__(self, sid):
        return self.replicas[sid]


def plan_replicas(loads: Mapping[int, float], budget: int) -> ReplicaAllocation:
    """Split ``budget`` replicas across shards in proportion to load.

    Shards whose proportional quota is below one are pinned at one replica
    and the rest of the budget is re-apportioned among the others, repeating
    until no quota falls below one. The remainder then goes by largest
    fraction, newer (higher id) shard on ties. Zero-load shards get none.
    """
    positive = sorted(s for s, v in loads.items() if v > 0)
    if budget < len(positive):
        raise InfeasibleBudgetError(
            f"budget {budget} is smaller than the {len(positive)} shards with load"
        )
    counts = {s: 0 for s in loads}
    if not positive:
        return ReplicaAllocation(counts, budget)
    grand = math.fsum(loads[s] for s in positive)
    exact = {s: budget * loads[s] / grand for s in positive}
    pinned: set[int] = set()
    while True:
        free = [s for s in positive if s not in pinned]
        left = budget - len(pinned)
        total = math.fsum(loads[s] for s in free)
        quota = {s: left * loads[s] / total for s in free}
        low = [s for s in free if quota[s] < 1]
        if not low:
            break
        pinned.update(low)
    for s in pinned:
        counts[s] = 1
    for s in free:
        counts[s] = math.floor(quota[s])
    extra = left - sum(counts[s] for s in free)
    for s in sorted(free, key=lambda s: (-(quota[s] - math.floor(quota[s])), -s))[:extra]:
        counts[s] += 1
    _rebalance(counts, exact)
    return ReplicaAllocation(counts, budget)


def _rebalance(counts: dict[int, int], exact: Mapping[int, float]) -> None:
    """Move single replicas from the most over-served shard to the most
    under-served one while that lowers the larger of their two deviations.
    Pinning can leave an avoidable deviation above one; this removes it."""
    while True:
        donors = [s for s in exact if counts[s] > 1]
        if not donors:
            return
        over = max(donors, key=lambda s: (counts[s] - exact[s], -s))
        under = max(exact, key=lambda s: (exact[s] - counts[s], s))
        before = max(counts[over] - exact[over], exact[under] - counts[under])
        after = max(abs(counts[over] - 1 - exact[over]), abs(counts[under] + 1 - exact[under]))
        if over == under or after >= before - 1e-12:
            return
        counts[over] -= 1
        counts[under] += 1


def retire_shards(fleet: FleetDistribution, topology: ShardTopology) -> set[int]:
    """Shards no client snapshot predates, hence never searched."""
    if topology.mode is not ShardingMode.DATE:
        raise UnsupportedModeError("retirement is defined for date sharding")
    if not fleet.snapshot_dates:
        return set()
    oldest = fleet.oldest
    return {sid for sid, s in topology.shards.items() if s.range_end <= oldest}


def retire(topology: ShardTopology, shard_ids: Iterable[int]) -> ShardTopology:
    return topology.retire(shard_ids)


def routing_rows(
    topology: ShardTopology,
    loads: Mapping[int, float],
    allocation: ReplicaAllocation | None = None,
) -> list[list]:
    rows = []
    for sid in topology.shard_ids:
        s = topology.shards[sid]
        rows.append([
            sid,
            s.range_start.isoformat() if s.range_start else "",
            s.range_end.isoformat() if s.range_end else "",
            repr(float(loads.get(sid, 0.0))),
            "" if allocation is None else allocation.replicas.get(sid, 0),
        ])
    return rows


ROUTING_COLUMNS = ["shard_id", "range_start", "range_end", "expected_load", "replicas"]


def write_routing_csv(
    target: str | Path | IO[str],
    topology: ShardTopology,
    loads: Mapping[int, float],
    allocation: ReplicaAllocation | None = None,
) -> None:
    """Write the routing/load table to a path or an open text file."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as fh:
            write_routing_csv(fh, topology, loads, allocation)
        return
    w = csv.writer(target, lineterminator="\n")
    w.writerow(ROUTING_COLUMNS)
    w.writerows(routing_rows(topology, loads, allocation))
