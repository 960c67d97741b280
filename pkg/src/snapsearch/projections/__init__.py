from .estimate import (
    Probe,
    SampleEngine,
    WebSizeEstimate,
    estimate_engine_size,
    estimate_web_size,
    uniqueness,
    zipf_probes,
)
from .models import (
    Anchor,
    AnchorInterpolated,
    CubicSigmoid,
    DoublingEvery,
    FunctionModel,
    GrowthModel,
    GrowthRate,
    Linear,
    Scaled,
    Sum,
    TenfoldEvery,
    load_anchors,
)
from .web import (
    BANDWIDTH,
    DEVICES,
    MEDIA_FACTOR,
    RENEWAL_RATE,
    BroadcastReport,
    CrossoverReport,
    bandwidth,
    broadcast_feasible,
    capacity_model,
    crossover,
    crossover_csv,
    curve,
    curve_csv,
    demand_model,
    device_capacity,
    human_internet_years,
    index_size,
    internet_users,
    media_factor_from_page_stats,
    observed_creation_rates,
    page_size,
    pages,
    population,
    searches_per_month,
    searches_per_user,
    sensitivity,
    sites,
    transfer_time,
    web_full_size,
    web_text_size,
)

__all__ = [
    "Anchor",
    "AnchorInterpolated",
    "BANDWIDTH",
    "BroadcastReport",
    "CrossoverReport",
    "CubicSigmoid",
    "DEVICES",
    "DoublingEvery",
    "FunctionModel",
    "GrowthModel",
    "GrowthRate",
    "Linear",
    "MEDIA_FACTOR",
    "Probe",
    "RENEWAL_RATE",
    "SampleEngine",
    "Scaled",
    "Sum",
    "TenfoldEvery",
    "WebSizeEstimate",
    "bandwidth",
    "broadcast_feasible",
    "capacity_model",
    "crossover",
    "crossover_csv",
    "curve",
    "curve_csv",
    "demand_model",
    "device_capacity",
    "estimate_engine_size",
    "estimate_web_size",
    "human_internet_years",
    "index_size",
    "internet_users",
    "load_anchors",
    "media_factor_from_page_stats",
    "observed_creation_rates",
    "page_size",
    "pages",
    "population",
    "searches_per_month",
    "searches_per_user",
    "sensitivity",
    "sites",
    "transfer_time",
    "uniqueness",
    "web_full_size",
    "web_text_size",
    "zipf_probes",
]
