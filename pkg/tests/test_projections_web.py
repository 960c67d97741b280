import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from oracles import constrained_cubic
from snapsearch.errors import OutOfRangeError, ParameterError
from snapsearch.projections import (
    BANDWIDTH,
    DEVICES,
    MEDIA_FACTOR,
    DoublingEvery,
    Linear,
    bandwidth,
    broadcast_feasible,
    capacity_model,
    crossover,
    crossover_csv,
    curve,
    curve_csv,
    device_capacity,
    human_internet_years,
    index_size,
    internet_users,
    load_anchors,
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
from snapsearch.projections.web import demand_model


# users and pages

def _users_oracle(years):
    anchors = [(a.year, a.value) for a in load_anchors("internet_users")]
    cubic = constrained_cubic(1990, 2050, population(2050), anchors)
    return np.minimum(np.maximum(cubic(years), 0.0), population(years))


def test_users_match_constrained_fit():
    years = np.arange(1990, 2051, dtype=float)
    assert np.allclose(internet_users(years), _users_oracle(years), rtol=1e-7, atol=1.0)
    assert internet_users(2050) == population(2050)
    assert np.all(internet_users(years) <= population(years))


def test_pages_are_twice_summed_users():
    for end in (1990, 2000, 2011, 2050):
        years = np.arange(1990, end + 1, dtype=float)
        expected = 2.0 * math.fsum(_users_oracle(years))
        assert math.isclose(pages(end), expected, rel_tol=1e-7, abs_tol=2.0)
    assert math.isclose(human_internet_years(2000.5), (human_internet_years(2000) + human_internet_years(2001)) / 2)


def test_pages_scale_with_creation_rate():
    assert math.isclose(pages(2030, 3.0), 1.5 * pages(2030))
    assert web_text_size(2030, 0) == 0.0


@given(st.floats(1990, 2049), st.floats(0, 1))
def test_cumulative_quantities_never_fall(y, dy):
    hi = min(y + dy, 2050)
    assert human_internet_years(hi) >= human_internet_years(y)
    if y >= 1997:
        assert web_text_size(hi) >= web_text_size(y)


def test_page_size_regression():
    anchors = load_anchors("page_size")
    xs = np.array([a.year for a in anchors])
    ys = np.array([a.value for a in anchors])
    slope = ((xs - xs.mean()) * (ys - ys.mean())).sum() / ((xs - xs.mean()) ** 2).sum()
    expected = ys.mean() + slope * (2050 - xs.mean())
    assert math.isclose(page_size(2050), expected, rel_tol=1e-9)
    assert math.isclose(page_size(2050), 76.19e3, rel_tol=1e-3)
    with pytest.raises(OutOfRangeError):
        page_size(1996)


def test_sizes_compose():
    assert math.isclose(web_text_size(2040), pages(2040) * page_size(2040))
    assert math.isclose(web_full_size(2040), MEDIA_FACTOR * web_text_size(2040))
    assert math.isclose(index_size(2040, 0.02), 0.02 * web_text_size(2040))
    for bad in (0, 1, -0.1, 1.5):
        with pytest.raises(ParameterError):
            index_size(2040, bad)


def test_media_factor():
    assert math.isclose(media_factor_from_page_stats(), 320.24 / (93.98 / 4.21))
    assert round(media_factor_from_page_stats()) == MEDIA_FACTOR


def test_observed_creation_rates():
    users = load_anchors("internet_users")
    rates = dict(observed_creation_rates())
    # by mid-2000 the users of 1990..1999 plus half of 2000 have accrued
    hiy_2000_5 = sum(a.value for a in users if a.year < 2000) + 0.5 * users[10].value
    assert math.isclose(rates[2000.5], 1.06e9 / hiy_2000_5, rel_tol=1e-12)
    assert all(0.5 < r < 4 for r in rates.values())


# devices and bandwidth

def test_device_models():
    assert device_capacity(1980) == 5e6
    assert math.isclose(device_capacity(1981.5), 1e7)
    assert device_capacity(2025, "sd") == 2e12
    assert math.isclose(device_capacity(2026, "sd"), 4e12)
    disk = load_anchors("disk")
    anchored = DEVICES["disk-anchored"]
    assert math.isclose(anchored(disk[0].year), disk[0].value)
    assert math.isclose(anchored(disk[1].year), disk[1].value)
    sd = load_anchors("sd_card")
    assert math.isclose(device_capacity(sd[1].year, "sd-market"), sd[1].value)
    with pytest.raises(ParameterError):
        device_capacity(2020, "tape")
    with pytest.raises(OutOfRangeError):
        device_capacity(1970)


def test_bandwidth_models():
    assert math.isclose(bandwidth(1990), 1.25e6)
    assert math.isclose(bandwidth(2050), 1.25e18)
    assert bandwidth(2050, "nielsen") == 42e15 / 8
    assert math.isclose(bandwidth(2049, "nielsen"), 42e15 / 8 / 1.5)
    with pytest.raises(ParameterError):
        bandwidth(2050, "dialup")
    assert transfer_time(0, 2030) == 0
    assert math.isclose(transfer_time(1.25e18, 2050), 1.0)
    with pytest.raises(ParameterError):
        transfer_time(-1, 2030)


def test_searches_and_sites():
    anchors = load_anchors("searches_us")
    for a in anchors:
        assert math.isclose(searches_per_month(a.year), a.value)
    assert math.isclose(searches_per_month(2050), 9.84e10, rel_tol=1e-3)
    with pytest.raises(ParameterError):
        searches_per_month(2050, "world")
    us = load_anchors("us_population")
    assert math.isclose(searches_per_user(2050), searches_per_month(2050) / us[1].value)
    assert sites(2050) == 1.2e9
    assert math.isclose(sites(2011), 130207722)


# demand specs

@pytest.mark.parametrize(
    "spec, factor",
    [("text", 1.0), ("index", 0.11), ("index@0.02", 0.02), ("text+index@0.11", 1.11),
     ("full", MEDIA_FACTOR), ("full+index@0.02", MEDIA_FACTOR + 0.02)],
)
def test_demand_specs(spec, factor):
    assert math.isclose(demand_model(spec)(2040), factor * web_text_size(2040))


@pytest.mark.parametrize("spec", ["", "video", "text+text", "text@0.1", "text+full", "index@2", "index@x"])
def test_bad_demand_specs(spec):
    with pytest.raises(ParameterError):
        demand_model(spec)


def test_capacity_model_names():
    assert capacity_model("disk") is DEVICES["disk"]
    assert capacity_model("ieee") is BANDWIDTH["ieee"]
    with pytest.raises(ParameterError):
        capacity_model("floppy")


# crossovers

def _first_root(capacity, demand, lo, hi):
    """Independent crossover: fine grid for the first sign change, then Brent."""
    f = lambda y: math.log(capacity(y)) - math.log(demand(y))  # noqa: E731
    grid = np.linspace(lo, hi, 20_001)
    signs = np.array([f(y) >= 0 for y in grid])
    i = int(np.argmax(signs))
    assert signs[i]
    return brentq(f, grid[i - 1], grid[i], xtol=1e-9)


@pytest.mark.parametrize(
    "cap, dem, scale",
    [("disk", "index@0.11", 1), ("disk", "text+index@0.11", 1), ("sd", "index@0.11", 1),
     ("sd", "text+index@0.11", 1), ("sd", "full", 1), ("disk", "index@0.11", 10),
     ("disk", "text+index@0.11", 10), ("disk", "full", 10), ("disk-anchored", "index@0.11", 1)],
)
def test_crossover_matches_root_finder(cap, dem, scale):
    capacity = capacity_model(cap)
    demand = demand_model(dem).scaled(scale)
    report = sensitivity(scale, capacity, demand_model(dem))
    lo = max(capacity.lo, demand.lo)
    root = _first_root(capacity, demand, lo, 2050)
    assert report is not None
    assert root <= report.year <= root + 0.01
    assert report.capacity >= report.demand
    assert report.scale == scale


def test_crossover_edge_cases():
    demand = Linear(0, 100.0, lo=2000, hi=2050, name="flat")
    assert crossover(DoublingEvery(1, 2000, 1.0, name="slow").scaled(1e-30), demand) is None
    with pytest.raises(ParameterError):
        crossover(DoublingEvery(1, 2000, 1e6), demand)
    with pytest.raises(OutOfRangeError):
        crossover(DoublingEvery(1, 2000, 1.0), demand, 2010, 2010)
    with pytest.raises(ParameterError):
        sensitivity(0, DoublingEvery(1, 2000, 1.0), demand)
    exact = crossover(DoublingEvery(1, 2000, 1.0), demand)
    assert math.log2(100) <= exact.year - 2000 <= math.log2(100) + 0.01


def test_curve_and_csv():
    rows = curve(Linear(2, 0), 2000, 2001, 0.5)
    assert rows == [(2000, 4000.0), (2000.5, 4001.0), (2001, 4002.0)]
    parsed = list(csv.reader(io.StringIO(curve_csv(rows))))
    assert parsed[0] == ["year", "value"] and parsed[2] == ["2000.5", "4001.0"]
    with pytest.raises(ParameterError):
        curve(Linear(1, 0), 2000, 2001, 0)
    text = crossover_csv([("disk", "full", 10.0, None), ("sd", "full", 1.0, sensitivity(1, capacity_model("sd"), demand_model("full")))])
    lines = text.splitlines()
    assert lines[0] == "capacity_model,demand_model,scale,year"
    assert lines[1] == "disk,full,10,"
    assert lines[2].startswith("sd,full,1,204")


# broadcast feasibility

def test_broadcast_feasible():
    r = broadcast_feasible(2030, modification_factor=0.5)
    expected = internet_users(2030) * 2.0 / 365 * page_size(2030)
    assert math.isclose(r.new_bytes, expected)
    assert math.isclose(r.modified_bytes, 0.5 * expected)
    assert math.isclose(r.daily_bytes, 1.5 * expected)
    assert r.capacity["ieee"] == bandwidth(2030) * 86400
    assert r.feasible == {m: r.daily_bytes <= c for m, c in r.capacity.items()}
    assert broadcast_feasible(2030, creation_rate=0).daily_bytes == 0
    with pytest.raises(ParameterError):
        broadcast_feasible(2030, modification_factor=-1)
