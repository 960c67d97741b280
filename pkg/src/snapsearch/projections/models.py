"""Growth model families. Every model maps a real year (or array of years) to a value."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

import numpy as np

from ..errors import OutOfRangeError, ParameterError


@dataclass(frozen=True)
class Anchor:
    year: float
    value: float
    citation: str


def load_anchors(name: str) -> list[Anchor]:
    """Read a shipped ``data/<name>.csv`` (columns year, value, citation)."""
    text = resources.files(__package__).joinpath("data", f"{name}.csv").read_text()
    rows = list(csv.DictReader(text.splitlines()))
    anchors = [Anchor(float(r["year"]), float(r["value"]), r["citation"]) for r in rows]
    years = [a.year for a in anchors]
    if any(b <= a for a, b in zip(years, years[1:])):
        raise ValueError(f"{name}.csv: years must be strictly increasing")
    return anchors


class GrowthModel:
    """Base class: range checking, scaling and addition."""

    name = "model"
    lo = -math.inf
    hi = math.inf

    def __call__(self, year):
        y = np.asarray(year, dtype=np.float64)
        if y.size and (y.min() < self.lo - 1e-9 or y.max() > self.hi + 1e-9):
            raise OutOfRangeError(f"{self.name}: year {year} outside [{self.lo}, {self.hi}]")
        out = self._eval(y)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, y):
        raise NotImplementedError

    def scaled(self, factor: float, name: str | None = None) -> "GrowthModel":
        return Scaled(self, factor, name)

    def __add__(self, other: "GrowthModel") -> "GrowthModel":
        return Sum([self, other])

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} [{self.lo}, {self.hi}]>"


class Linear(GrowthModel):
    def __init__(self, slope, intercept, lo=-math.inf, hi=math.inf, name="linear"):
        self.slope, self.intercept = float(slope), float(intercept)
        self.lo, self.hi, self.name = lo, hi, name

    @classmethod
    def through(cls, p0, p1, **kw):
        (x0, y0), (x1, y1) = p0, p1
        slope = (y1 - y0) / (x1 - x0)
        return cls(slope, y0 - slope * x0, **kw)

    @classmethod
    def fit(cls, xs, ys, **kw):
        """Least-squares line."""
        slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
        return cls(slope, intercept, **kw)

    def _eval(self, y):
        return self.slope * y + self.intercept


class Exponential(GrowthModel):
    """value(ref_year) = ref_value, multiplied by ``factor`` every ``period`` years."""

    factor = math.e

    def __init__(self, period, ref_year, ref_value, lo=-math.inf, hi=math.inf, name=None):
        if not period > 0 or not ref_value > 0:
            raise ParameterError("period and reference value must be positive")
        self.period, self.ref_year, self.ref_value = float(period), float(ref_year), float(ref_value)
        self.lo, self.hi = lo, hi
        self.name = name or type(self).__name__

    @classmethod
    def through(cls, p0, p1, **kw):
        """The member of the family through two (year, value) points."""
        (x0, y0), (x1, y1) = p0, p1
        period = (x1 - x0) * math.log(cls.factor) / math.log(y1 / y0)
        return cls(period, x0, y0, **kw)

    def _eval(self, y):
        return self.ref_value * self.factor ** ((y - self.ref_year) / self.period)


class DoublingEvery(Exponential):
    factor = 2.0


class TenfoldEvery(Exponential):
    factor = 10.0


class GrowthRate(Exponential):
    """Compound growth: ``(1 + rate)`` per year."""

    def __init__(self, rate, ref_year, ref_value, lo=-math.inf, hi=math.inf, name=None):
        self.factor = 1.0 + rate
        super().__init__(1.0, ref_year, ref_value, lo, hi, name)


class AnchorInterpolated(GrowthModel):
    """Piecewise-linear through an anchor table; only defined inside it."""

    def __init__(self, anchors: Sequence[Anchor] | Sequence[tuple[float, float]], name="anchors"):
        pts = [(a.year, a.value) if isinstance(a, Anchor) else tuple(a) for a in anchors]
        self.years = np.array([p[0] for p in pts], dtype=np.float64)
        self.values = np.array([p[1] for p in pts], dtype=np.float64)
        if np.any(np.diff(self.years) <= 0):
            raise ParameterError("anchor years must be strictly increasing")
        self.lo, self.hi = float(self.years[0]), float(self.years[-1])
        self.name = name

    def _eval(self, y):
        return np.interp(y, self.years, self.values)


class CubicSigmoid(GrowthModel):
    """Cubic in (year - start) pinned to 0 at start and ``end_value`` at end,
    least-squares through the given points, clamped to [0, ceiling(year)].

    With t = year - start and T = end - start, pinning removes one degree of
    freedom: f(t) = E t / T + b (t^2 - T t) + c (t^3 - T^2 t).
    """

    def __init__(self, start_year, end_year, end_value, points, ceiling: Callable | None = None, name="cubic"):
        self.start, self.end, self.end_value = float(start_year), float(end_year), float(end_value)
        self.lo, self.hi, self.name = self.start, self.end, name
        self.ceiling = ceiling
        t = np.array([p[0] for p in points], dtype=np.float64) - self.start
        v = np.array([p[1] for p in points], dtype=np.float64)
        T, E = self.end - self.start, self.end_value
        X = np.stack([t**2 - T * t, t**3 - T * T * t], axis=1)
        b, c = np.linalg.lstsq(X, v - E * t / T, rcond=None)[0]
        a = (E - b * T * T - c * T**3) / T
        self.coef = (float(a), float(b), float(c))

    def raw(self, y):
        a, b, c = self.coef
        t = np.asarray(y, dtype=np.float64) - self.start
        return ((c * t + b) * t + a) * t

    def _eval(self, y):
        f = np.maximum(self.raw(y), 0.0)
        if self.ceiling is not None:
            f = np.minimum(f, self.ceiling(y))
        # pin the end point exactly (the clamp and float noise can disturb it)
        return np.where(y == self.end, self.end_value, f)


class Scaled(GrowthModel):
    def __init__(self, model: GrowthModel, factor: float, name=None):
        self.model, self.factor = model, float(factor)
        self.lo, self.hi = model.lo, model.hi
        self.name = name or f"{model.name}*{factor:g}"

    def _eval(self, y):
        return self.factor * self.model._eval(y)


class Sum(GrowthModel):
    def __init__(self, models: Sequence[GrowthModel], name=None):
        self.models = list(models)
        self.lo = max(m.lo for m in self.models)
        self.hi = min(m.hi for m in self.models)
        self.name = name or "+".join(m.name for m in self.models)

    def _eval(self, y):
        total = 0.0
        for m in self.models:
            total = total + m._eval(y)
        return total


class FunctionModel(GrowthModel):
    """Wrap a vectorized function of year."""

    def __init__(self, fn: Callable, lo=-math.inf, hi=math.inf, name="fn"):
        self.fn, self.lo, self.hi, self.name = fn, lo, hi, name

    def _eval(self, y):
        return self.fn(y)
