"""Web growth, storage and bandwidth projections, and crossover solving.

Sizes are base-10 bytes, years are real numbers.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import OutOfRangeError, ParameterError
from .models import (
    AnchorInterpolated,
    CubicSigmoid,
    DoublingEvery,
    FunctionModel,
    GrowthModel,
    GrowthRate,
    Linear,
    Scaled,
    TenfoldEvery,
    load_anchors,
)

FIRST_YEAR = 1990
LAST_YEAR = 2050
CREATION_RATE = 2.0  # pages per person per Internet year
INDEX_RATIOS = (0.02, 0.11)
RENEWAL_RATE = (0.70, 0.77)  # share of sites renewed each year


def media_factor_from_page_stats(on_wire_kb=320.24, html_kb=93.98, html_resources=4.21) -> float:
    """Whole-page bytes over one HTML resource's bytes (2010 crawl statistics)."""
    return on_wire_kb / (html_kb / html_resources)


MEDIA_FACTOR = 14


# population and users

POPULATION = AnchorInterpolated(load_anchors("population"), name="population")


def population(year):
    return POPULATION(year)


def _ceiling(y):
    return POPULATION(y)


INTERNET_USERS = CubicSigmoid(
    FIRST_YEAR,
    LAST_YEAR,
    POPULATION(LAST_YEAR),
    [(a.year, a.value) for a in load_anchors("internet_users")],
    ceiling=_ceiling,
    name="internet_users",
)


def internet_users(year):
    return INTERNET_USERS(year)


@lru_cache(maxsize=None)
def _hiy_table() -> tuple[np.ndarray, np.ndarray]:
    years = np.arange(FIRST_YEAR, LAST_YEAR + 1, dtype=np.float64)
    return years, np.cumsum(INTERNET_USERS(years))


def _hiy(y):
    years, sums = _hiy_table()
    return np.interp(y, years, sums)


HUMAN_INTERNET_YEARS = FunctionModel(_hiy, FIRST_YEAR, LAST_YEAR, "human_internet_years")


def human_internet_years(year):
    """Person-years of Internet use: users summed over whole years 1990..year.

    Between whole years the running sum is interpolated linearly.
    """
    return HUMAN_INTERNET_YEARS(year)


def pages(year, creation_rate: float = CREATION_RATE):
    return creation_rate * human_internet_years(year)


def observed_human_internet_years(year):
    """Running sum of the reported (not fitted) user counts, interpolated between year ends.

    Users counted for year y have accumulated in full by the end of y (time y + 1).
    """
    users = load_anchors("internet_users")
    ends = np.array([users[0].year] + [a.year + 1 for a in users])
    return np.interp(year, ends, np.concatenate([[0.0], np.cumsum([a.value for a in users])]))


def observed_creation_rates() -> list[tuple[float, float]]:
    """Pages per human Internet year implied by reported search engine index sizes."""
    return [
        (a.year, a.value / float(observed_human_internet_years(a.year)))
        for a in load_anchors("google_index")
    ]


# page size and web size

PAGE_SIZE_ANCHORS = load_anchors("page_size")
PAGE_SIZE = Linear.fit(
    [a.year for a in PAGE_SIZE_ANCHORS], [a.value for a in PAGE_SIZE_ANCHORS],
    lo=1997, hi=LAST_YEAR, name="page_size",
)


def page_size(year):
    return PAGE_SIZE(year)


def web_text_size(year, creation_rate: float = CREATION_RATE):
    if creation_rate == 0:
        return 0.0 if np.ndim(year) == 0 else np.zeros(np.shape(year))
    return pages(year, creation_rate) * page_size(year)


def web_full_size(year, media_factor: float = MEDIA_FACTOR):
    return web_text_size(year) * media_factor


def _check_ratio(ratio):
    if not 0 < ratio < 1:
        raise ParameterError(f"index ratio must be in (0, 1), got {ratio}")


def index_size(year, ratio: float = 0.11):
    _check_ratio(ratio)
    return ratio * web_text_size(year)


# storage devices

DISK_ANCHORS = load_anchors("disk")
SD_ANCHORS = load_anchors("sd_card")

DEVICES: dict[str, GrowthModel] = {
    # 18-month doubling from 5 MB in 1980
    "disk": DoublingEvery(1.5, 1980, 5e6, lo=1980, name="disk"),
    # exponential through the 1981 and 2011 retail points
    "disk-anchored": DoublingEvery.through(
        (DISK_ANCHORS[0].year, DISK_ANCHORS[0].value),
        (DISK_ANCHORS[1].year, DISK_ANCHORS[1].value),
        lo=DISK_ANCHORS[0].year, name="disk-anchored",
    ),
    # yearly doubling reaching 2 TB on one card in 2025
    "sd": DoublingEvery(1.0, 2025, 2e12, lo=SD_ANCHORS[0].year, name="sd"),
    # yearly doubling through the 2011 retail 128 GB card
    "sd-market": DoublingEvery(1.0, SD_ANCHORS[1].year, SD_ANCHORS[1].value, lo=SD_ANCHORS[0].year, name="sd-market"),
}


def device_capacity(year, device: str = "disk"):
    try:
        model = DEVICES[device]
    except KeyError:
        raise ParameterError(f"unknown device {device!r}; choose from {sorted(DEVICES)}") from None
    return model(year)


# bandwidth

NIELSEN_2050 = 42e15 / 8  # 42 Pb/s in bytes per second

BANDWIDTH: dict[str, GrowthModel] = {
    "ieee": TenfoldEvery(5, FIRST_YEAR, 1.25e6, lo=FIRST_YEAR, name="ieee"),
    "nielsen": GrowthRate(0.5, LAST_YEAR, NIELSEN_2050, lo=FIRST_YEAR, name="nielsen"),
}


def bandwidth(year, model: str = "ieee"):
    try:
        m = BANDWIDTH[model]
    except KeyError:
        raise ParameterError(f"unknown bandwidth model {model!r}; choose from {sorted(BANDWIDTH)}") from None
    return m(year)


def transfer_time(nbytes, year, model: str = "ieee"):
    if np.any(np.asarray(nbytes) < 0):
        raise ParameterError("payload must be non-negative")
    return nbytes / bandwidth(year, model)


# searches and sites

_searches = load_anchors("searches_us")
SEARCHES = Linear.through(
    (_searches[0].year, _searches[0].value), (_searches[1].year, _searches[1].value),
    lo=2005, hi=LAST_YEAR, name="searches_per_month",
)
_us = load_anchors("us_population")
US_USERS = Linear.through((_us[0].year, _us[0].value), (_us[1].year, _us[1].value), lo=2005, hi=LAST_YEAR, name="us_users")


def searches_per_month(year, scope: str = "US"):
    if scope != "US":
        raise ParameterError("only US search volumes are modelled")
    return SEARCHES(year)


def searches_per_user(year):
    return SEARCHES(year) / US_USERS(year)


_sites = load_anchors("sites")
SITES = Linear.through((_sites[0].year, _sites[0].value), (_sites[1].year, _sites[1].value), lo=2004, hi=LAST_YEAR, name="sites")


def sites(year):
    return SITES(year)


# demand models by name

QUANTITIES = {
    "population": POPULATION,
    "users": INTERNET_USERS,
    "hiy": HUMAN_INTERNET_YEARS,
    "pages": FunctionModel(lambda y: pages(y), FIRST_YEAR, LAST_YEAR, "pages"),
    "page-size": PAGE_SIZE,
    "searches": SEARCHES,
    "sites": SITES,
}

_DEMAND = re.compile(r"^(?P<parts>[a-z]+(?:\+[a-z]+)*)(?:@(?P<ratio>[0-9.eE+-]+))?$")


def demand_model(spec: str, media_factor: float = MEDIA_FACTOR) -> GrowthModel:
    """Parse ``text``, ``index@0.11``, ``text+index@0.02``, ``full+index@0.11`` ...

    ``text`` is the web's HTML, ``full`` is text times the media factor and
    ``index`` is the ratio times text (ratio defaults to 0.11).
    """
    m = _DEMAND.match(spec.strip())
    if not m:
        raise ParameterError(f"bad demand spec {spec!r}")
    parts = m.group("parts").split("+")
    ratio = float(m.group("ratio")) if m.group("ratio") else 0.11
    weights = {"text": 1.0, "full": float(media_factor), "index": ratio}
    unknown = [p for p in parts if p not in weights]
    if unknown or len(set(parts)) != len(parts):
        raise ParameterError(f"bad demand spec {spec!r}: parts must be distinct among text, full, index")
    if "index" in parts:
        _check_ratio(ratio)
    elif m.group("ratio"):
        raise ParameterError(f"bad demand spec {spec!r}: a ratio needs an index part")
    if "text" in parts and "full" in parts:
        raise ParameterError("full already includes the text")
    factor = math.fsum(weights[p] for p in parts)
    return Scaled(FunctionModel(lambda y: web_text_size(y), 1997, LAST_YEAR, "text"), factor, name=spec)


def capacity_model(name: str) -> GrowthModel:
    if name in DEVICES:
        return DEVICES[name]
    if name in BANDWIDTH:
        return BANDWIDTH[name]
    raise ParameterError(f"unknown capacity model {name!r}; choose from {sorted(DEVICES) + sorted(BANDWIDTH)}")


def curve(model: GrowthModel, start: float, end: float, step: float = 1.0) -> list[tuple[float, float]]:
    if not step > 0:
        raise ParameterError("step must be positive")
    n = int(math.floor((end - start) / step + 1e-9)) + 1
    years = [start + i * step for i in range(max(n, 0))]
    return [(y, float(model(y))) for y in years]


def curve_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "value"])
    for y, v in rows:
        w.writerow([f"{y:g}", repr(v)])
    return buf.getvalue()


# crossovers

@dataclass(frozen=True)
class CrossoverReport:
    capacity_model: str
    demand_model: str
    scale: float
    year: float
    capacity: float
    demand: float


def crossover(
    capacity: GrowthModel,
    demand: GrowthModel,
    lo: float | None = None,
    hi: float | None = None,
    *,
    step: float = 0.25,
    resolution: float = 0.01,
    scale: float = 1.0,
) -> CrossoverReport | None:
    """First year in [lo, hi] where capacity meets demand, or None if it never does.

    A coarse scan finds the bracketing step, then bisection narrows it to
    ``resolution``; the reported year is the upper end of the final bracket,
    where capacity >= demand holds.
    """
    lo = max(capacity.lo, demand.lo) if lo is None else lo
    hi = min(capacity.hi, demand.hi) if hi is None else hi
    if not hi > lo:
        raise OutOfRangeError(f"empty year range [{lo}, {hi}]")

    def meets(y):
        return capacity(y) >= demand(y)

    if meets(lo):
        raise ParameterError(f"{capacity.name} already meets {demand.name} at {lo:g}")
    prev = lo
    found = None
    n = int(math.ceil((hi - lo) / step))
    for i in range(1, n + 1):
        y = min(lo + i * step, hi)
        if meets(y):
            found = y
            break
        prev = y
    if found is None:
        return None
    a, b = prev, found
    while b - a > resolution:
        mid = (a + b) / 2
        if meets(mid):
            b = mid
        else:
            a = mid
    return CrossoverReport(capacity.name, demand.name, scale, b, float(capacity(b)), float(demand(b)))


def sensitivity(scale: float, capacity: GrowthModel, demand: GrowthModel, lo=None, hi=None, **kw):
    """Crossover with demand multiplied by ``scale``."""
    if not scale > 0:
        raise ParameterError("scale must be positive")
    scaled = demand if scale == 1 else Scaled(demand, scale, name=demand.name)
    return crossover(capacity, scaled, lo, hi, scale=scale, **kw)


def crossover_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["capacity_model", "demand_model", "scale", "year"])
    for cap, dem, scale, rep in reports:
        w.writerow([cap, dem, f"{scale:g}", "" if rep is None else f"{rep.year:.2f}"])
    return buf.getvalue()


# broadcast feasibility

@dataclass(frozen=True)
class BroadcastReport:
    year: float
    users: float
    new_bytes: float
    modified_bytes: float
    capacity: dict = field(default_factory=dict)  # bytes per day by bandwidth model
    feasible: dict = field(default_factory=dict)

    @property
    def daily_bytes(self) -> float:
        return self.new_bytes + self.modified_bytes


def broadcast_feasible(year, modification_factor: float = 1.0, creation_rate: float = CREATION_RATE) -> BroadcastReport:
    """Daily bytes of new and modified pages against a day of bandwidth."""
    if modification_factor < 0:
        raise ParameterError("modification factor must be non-negative")
    users = float(internet_users(year))
    if users == 0:
        new = 0.0
    else:
        new = users * creation_rate / 365 * float(page_size(year))
    modified = new * modification_factor
    capacity = {m: float(bandwidth(year, m)) * 86400 for m in BANDWIDTH}
    feasible = {m: new + modified <= c for m, c in capacity.items()}
    return BroadcastReport(float(year), users, new, modified, capacity, feasible)
