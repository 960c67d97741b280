from .fleet import (
    FleetDistribution,
    ReplicaAllocation,
    expected_shard_load,
    plan_replicas,
    retire,
    retire_shards,
    write_routing_csv,
)
from .routing import (
    ClientSnapshot,
    DataCentre,
    QueryPlan,
    SupersedeIndex,
    execute_query,
    global_stats,
    merge,
    plan_query,
    shards_after,
    shed_load,
    supersede_since,
)
from .topology import (
    DEFAULT_GRANULARITY,
    Shard,
    ShardingMode,
    ShardTopology,
    assign_shard,
    bucket_of,
    bucket_range,
    build_topology,
    load_topology,
    save_topology,
)

__all__ = [
    "DEFAULT_GRANULARITY",
    "ClientSnapshot",
    "DataCentre",
    "FleetDistribution",
    "QueryPlan",
    "ReplicaAllocation",
    "Shard",
    "ShardTopology",
    "ShardingMode",
    "SupersedeIndex",
    "assign_shard",
    "bucket_of",
    "bucket_range",
    "build_topology",
    "execute_query",
    "expected_shard_load",
    "global_stats",
    "load_topology",
    "merge",
    "plan_query",
    "plan_replicas",
    "retire",
    "retire_shards",
    "save_topology",
    "shards_after",
    "shed_load",
    "supersede_since",
    "write_routing_csv",
]
