"""Finite time scales and the delta calculus on them.

A time scale here is a finite, strictly increasing set of reals. Every
interior point is right-scattered, so delta integrals are exact finite
sums and delta derivatives are forward differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyScale,
    NonMonotone,
    NotInKappa,
    NotRefinable,
    NotRegressive,
    PointNotInScale,
    ReversedRange,
    ScaleError,
    ScaleMismatch,
)

DUPLICATE_RTOL = 1e-12
SNAP_RTOL = 1e-9

SCALE_KINDS = ("integer", "hgrid", "uniform", "qgeometric", "explicit", "hybrid")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeScale:
    points: np.ndarray
    generator_tag: str = "explicit"
    spec: Mapping[str, Any] | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 3:
            raise EmptyScale(f"a time scale needs at least 3 points, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise ScaleError("time scale points must be finite")
        span = pts[-1] - pts[0]
        gaps = np.diff(pts)
        if span <= 0 or np.any(gaps <= DUPLICATE_RTOL * abs(span)):
            bad = int(np.argmin(gaps))
            raise NonMonotone(
                f"points must be strictly increasing; problem at index {bad + 1} "
                f"({pts[bad]!r} -> {pts[bad + 1]!r})"
            )
        object.__setattr__(self, "points", _frozen(pts))
        mu = np.empty_like(pts)
        mu[:-1] = gaps
        mu[-1] = 0.0
        object.__setattr__(self, "_mu", _frozen(mu))

    # -- basic geometry ------------------------------------------------------

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, TimeScale):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.all(self.points == other.points)
        )

    def __hash__(self):
        return hash(self.points.tobytes())

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    @property
    def span(self) -> float:
        return self.b - self.a

    @property
    def graininess(self) -> np.ndarray:
        """mu at every point; the last entry is 0 by convention."""
        return self._mu

    @property
    def refinable(self) -> bool:
        return self.spec is not None and self.spec.get("kind") in ("uniform", "hybrid")

    def index(self, t: float) -> int:
        """Index of the scale point nearest to ``t`` (snapping within 1e-9*span)."""
        pts = self.points
        t = float(t)
        j = int(np.searchsorted(pts, t))
        best = None
        for cand in (j - 1, j):
            if 0 <= cand < pts.size and (best is None or abs(pts[cand] - t) < abs(pts[best] - t)):
                best = cand
        if best is None or abs(pts[best] - t) > SNAP_RTOL * self.span:
            raise PointNotInScale(f"{t!r} is not a point of the time scale")
        return best

    def __contains__(self, t) -> bool:
        try:
            self.index(t)
        except PointNotInScale:
            return False
        return True

    def sigma(self, t: float) -> float:
        i = self.index(t)
        return float(self.points[min(i + 1, len(self) - 1)])

    def rho(self, t: float) -> float:
        i = self.index(t)
        return float(self.points[max(i - 1, 0)])

    def mu(self, t: float) -> float:
        return float(self._mu[self.index(t)])

    def kappa(self, order: int = 1) -> np.ndarray:
        """Points of T^kappa (order 1) or T^kappa^2 (order 2): drop the last ``order`` points."""
        return self.points[: len(self) - order]

    def __repr__(self):
        return f"TimeScale({self.generator_tag}, n={len(self)}, [{self.a:g}, {self.b:g}])"


def sigma(ts: TimeScale, t: float) -> float:
    return ts.sigma(t)


def rho(ts: TimeScale, t: float) -> float:
    return ts.rho(t)


def mu(ts: TimeScale, t: float) -> float:
    return ts.mu(t)


# -- constructors ------------------------------------------------------------

def integer(a: int, b: int) -> TimeScale:
    if int(a) != a or int(b) != b:
        raise ScaleError("integer scale needs integer endpoints")
    return TimeScale(np.arange(int(a), int(b) + 1, dtype=float), "integer",
                     {"kind": "integer", "a": int(a), "b": int(b)})


def hgrid(a: float, b: float, h: float) -> TimeScale:
    if h <= 0:
        raise ScaleError("hgrid step must be positive")
    count = round((b - a) / h)
    if count < 0 or abs(a + count * h - b) > SNAP_RTOL * max(abs(b - a), h):
        raise ScaleError(f"b={b!r} is not on the grid a + h*Z (a={a!r}, h={h!r})")
    pts = a + h * np.arange(count + 1)
    pts[-1] = b
    return TimeScale(pts, "hgrid", {"kind": "hgrid", "a": a, "b": b, "h": h})


def uniform(a: float, b: float, n: int) -> TimeScale:
    """``n`` equal steps on [a, b], i.e. n+1 points."""
    n = int(n)
    if n < 2:
        raise EmptyScale("uniform scale needs n >= 2 steps")
    return TimeScale(np.linspace(a, b, n + 1), "uniform",
                     {"kind": "uniform", "a": a, "b": b, "n": n})


def qgeometric(q: float, a: float, count: int) -> TimeScale:
    """Points a, a*q, ..., a*q**(count-1)."""
    if q <= 1 or a <= 0:
        raise ScaleError("qgeometric scale needs q > 1 and a > 0")
    pts = a * np.power(float(q), np.arange(int(count)))
    return TimeScale(pts, "qgeometric", {"kind": "qgeometric", "q": q, "a": a, "count": int(count)})


def explicit(points: Sequence[float]) -> TimeScale:
    return TimeScale(np.asarray(points, dtype=float), "explicit",
                     {"kind": "explicit", "points": [float(p) for p in points]})


def hybrid(segments: Sequence[Mapping[str, Any]], points: Sequence[float] = ()) -> TimeScale:
    """Union of dense uniform segments ({"a", "b", "n"}) and isolated points."""
    parts = [np.linspace(s["a"], s["b"], int(s["n"]) + 1) for s in segments]
    parts.append(np.asarray(points, dtype=float))
    pts = np.concatenate(parts)
    pts.sort()
    span = pts[-1] - pts[0] if pts.size else 0.0
    # segments may share endpoints
    keep = np.concatenate([[True], np.diff(pts) > DUPLICATE_RTOL * abs(span)]) if pts.size else []
    spec = {"kind": "hybrid",
            "segments": [{"a": s["a"], "b": s["b"], "n": int(s["n"])} for s in segments],
            "points": [float(p) for p in points]}
    return TimeScale(pts[keep], "hybrid", spec)


def build_timescale(spec: Mapping[str, Any] | TimeScale) -> TimeScale:
    """Build a scale from its textual form, e.g. ``{"kind": "integer", "a": 0, "b": 10}``."""
    if isinstance(spec, TimeScale):
        return spec
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise ScaleError(f"malformed scale spec: {spec!r}")
    kind = spec["kind"]
    allowed = {
        "integer": {"a", "b"},
        "hgrid": {"a", "b", "h"},
        "uniform": {"a", "b", "n"},
        "qgeometric": {"q", "a", "count"},
        "explicit": {"points"},
        "hybrid": {"segments", "points"},
    }
    if kind not in allowed:
        raise ScaleError(f"unknown scale kind {kind!r}; expected one of {', '.join(SCALE_KINDS)}")
    extra = set(spec) - allowed[kind] - {"kind"}
    if extra:
        raise ScaleError(f"unexpected keys for {kind} scale: {sorted(extra)}")
    try:
        if kind == "integer":
            return integer(spec["a"], spec["b"])
        if kind == "hgrid":
            return hgrid(spec["a"], spec["b"], spec["h"])
        if kind == "uniform":
            return uniform(spec["a"], spec["b"], spec["n"])
        if kind == "qgeometric":
            return qgeometric(spec["q"], spec["a"], spec["count"])
        if kind == "explicit":
            return explicit(spec["points"])
        return hybrid(spec["segments"], spec.get("points", ()))
    except KeyError as exc:
        raise ScaleError(f"{kind} scale spec is missing key {exc.args[0]!r}") from None


def refine(spec: Mapping[str, Any] | TimeScale, factor: int) -> TimeScale:
    """Subdivide every dense segment by ``factor``; isolated points are kept.

    Integer, hgrid, q-geometric and explicit scales model discrete time
    exactly and are not refinable.
    """
    if isinstance(spec, TimeScale):
        if spec.spec is None:
            raise NotRefinable("scale has no generator spec")
        spec = spec.spec
    factor = int(factor)
    if factor < 1:
        raise ValueError("refinement factor must be a positive integer")
    kind = spec.get("kind")
    if kind == "uniform":
        return uniform(spec["a"], spec["b"], int(spec["n"]) * factor)
    if kind == "hybrid":
        segs = [dict(s, n=int(s["n"]) * factor) for s in spec["segments"]]
        return hybrid(segs, spec.get("points", ()))
    raise NotRefinable(f"{kind} scales model discrete time exactly and cannot be refined")


# -- grid functions ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    scale: TimeScale
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.scale),):
            raise ScaleMismatch(
                f"grid function has {vals.size} values for a scale of {len(self.scale)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def constant(cls, scale: TimeScale, c: float) -> "GridFunction":
        return cls(scale, np.full(len(scale), float(c)))

    @classmethod
    def from_callable(cls, scale: TimeScale, fn: Callable[[np.ndarray], Any]) -> "GridFunction":
        vals = np.broadcast_to(np.asarray(fn(scale.points), dtype=float), (len(scale),))
        return cls(scale, vals)

    def __call__(self, t: float) -> float:
        return float(self.values[self.scale.index(t)])

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"GridFunction({self.scale!r}, values={np.array2string(self.values, threshold=8)})"


def _check_scale(gf: GridFunction, ts: TimeScale | None):
    if ts is not None and gf.scale is not ts and gf.scale != ts:
        raise ScaleMismatch("grid function lives on a different time scale")


def prefix_integral(scale: TimeScale, values: np.ndarray) -> np.ndarray:
    """Array I with I[j] = integral over [t_0, t_j) of ``values``."""
    values = np.asarray(values, dtype=float)
    out = np.zeros(len(scale))
    np.cumsum(scale.graininess[:-1] * values[:-1], out=out[1:])
    return out


def delta_integral(gf: GridFunction, start: float, stop: float) -> float:
    """Cauchy delta integral of ``gf`` over [start, stop): sum of mu*gf."""
    ts = gf.scale
    i, j = ts.index(start), ts.index(stop)
    if j < i:
        raise ReversedRange(f"integration range [{start!r}, {stop!r}] is reversed")
    return float(np.dot(ts.graininess[i:j], gf.values[i:j]))


def delta_derivative(gf: GridFunction, t: float) -> float:
    ts = gf.scale
    i = ts.index(t)
    if i == len(ts) - 1:
        raise NotInKappa(f"{t!r} is the maximum of the scale; no delta derivative")
    return float((gf.values[i + 1] - gf.values[i]) / ts.graininess[i])


def delta_derivative_array(gf: GridFunction) -> np.ndarray:
    """Delta derivative on T^kappa (length n-1)."""
    return np.diff(gf.values) / gf.scale.graininess[:-1]


def ts_exponential(f: GridFunction, t: float, s: float) -> float:
    """e_f(t, s) as the product of (1 + mu f) over [s, t); reciprocal for s > t."""
    ts = f.scale
    i, j = ts.index(s), ts.index(t)
    lo, hi = min(i, j), max(i, j)
    factors = 1.0 + ts.graininess[lo:hi] * f.values[lo:hi]
    zero = np.flatnonzero(factors == 0.0)
    if zero.size:
        tau = float(ts.points[lo + zero[0]])
        raise NotRegressive(f"1 + mu*f vanishes at tau={tau!r}", tau=tau)
    value = math.prod(factors.tolist())
    return value if j >= i else 1.0 / value
