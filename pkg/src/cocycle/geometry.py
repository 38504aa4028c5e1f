"""Open planar regions (axis-aligned rectangles and disks) and polylines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Union

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInput
from .nerve import Cover

__all__ = ["Rect", "Disk", "Region", "Polyline", "GeomCover", "intersects", "triple_intersects"]


@dataclass(frozen=True)
class Rect:
    """The open rectangle ``(x0, x1) x (y0, y1)``."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        for name in ("x0", "y0", "x1", "y1"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidInput(f"rectangle {self} has no area")

    def contains(self, p) -> bool:
        x, y = p
        return self.x0 < x < self.x1 and self.y0 < y < self.y1

    def margin(self, p) -> float:
        x, y = p
        return min(x - self.x0, self.x1 - x, y - self.y0, self.y1 - y)

    def segment_exit(self, a, b) -> float:
        """Parameter in ``[0, 1]`` where ``a + s (b - a)`` leaves the rectangle.

        ``a`` must be inside; returns 1.0 when ``b`` is inside too.
        """
        if self.contains(b):
            return 1.0
        s = 1.0
        for lo, hi, ai, bi in ((self.x0, self.x1, a[0], b[0]), (self.y0, self.y1, a[1], b[1])):
            dv = bi - ai
            if dv > 0:
                s = min(s, (hi - ai) / dv)
            elif dv < 0:
                s = min(s, (lo - ai) / dv)
        return min(max(s, 0.0), 1.0)

    def to_json(self) -> dict:
        return {"rect": [self.x0, self.y0, self.x1, self.y1]}


@dataclass(frozen=True)
class Disk:
    """The open disk of radius ``r`` around ``(cx, cy)``."""

    cx: float
    cy: float
    r: float

    def __post_init__(self):
        for name in ("cx", "cy", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.r > 0:
            raise InvalidInput(f"disk {self} has no area")

    def contains(self, p) -> bool:
        dx, dy = p[0] - self.cx, p[1] - self.cy
        return dx * dx + dy * dy < self.r * self.r

    def margin(self, p) -> float:
        return self.r - math.hypot(p[0] - self.cx, p[1] - self.cy)

    def segment_exit(self, a, b) -> float:
        if self.contains(b):
            return 1.0
        vx, vy = b[0] - a[0], b[1] - a[1]
        wx, wy = a[0] - self.cx, a[1] - self.cy
        qa = vx * vx + vy * vy
        qb = 2 * (vx * wx + vy * wy)
        qc = wx * wx + wy * wy - self.r * self.r  # < 0 since a is inside
        disc = qb * qb - 4 * qa * qc
        # larger root, written to avoid cancellation
        s = 2 * -qc / (qb + math.sqrt(disc)) if qb > 0 else (-qb + math.sqrt(disc)) / (2 * qa)
        return min(max(s, 0.0), 1.0)

    def to_json(self) -> dict:
        return {"disk": [self.cx, self.cy, self.r]}


Region = Union[Rect, Disk]


def region_from_json(obj: Mapping) -> Region:
    try:
        if "rect" in obj:
            return Rect(*obj["rect"])
        if "disk" in obj:
            return Disk(*obj["disk"])
    except TypeError as exc:
        raise InvalidInput(f"bad region {obj!r}: {exc}") from exc
    raise InvalidInput(f"region must be {{'rect': ...}} or {{'disk': ...}}, got {obj!r}")


def _rect_meet(rects):
    x0 = max(r.x0 for r in rects)
    y0 = max(r.y0 for r in rects)
    x1 = min(r.x1 for r in rects)
    y1 = min(r.y1 for r in rects)
    if x0 < x1 and y0 < y1:
        return Rect(x0, y0, x1, y1)
    return None


def _rect_disk_meet(rect: Rect, disk: Disk) -> bool:
    nx = min(max(disk.cx, rect.x0), rect.x1)
    ny = min(max(disk.cy, rect.y0), rect.y1)
    return (nx - disk.cx) ** 2 + (ny - disk.cy) ** 2 < disk.r**2


def _witness_search(regions) -> bool:
    """Look for a point in every open region by maximizing the smallest margin.

    The maximization is concave; the answer is trusted only when the optimum
    is verified to lie in every region, so a ``True`` is exact while slivers
    thinner than the optimizer's accuracy may be missed.
    """
    disks = [r for r in regions if isinstance(r, Disk)]
    x0 = np.mean([[d.cx, d.cy] for d in disks], axis=0)
    scale = max(d.r for d in disks)
    cons = []
    for reg in regions:
        if isinstance(reg, Disk):
            cons.append(
                lambda z, c=reg: (c.r**2 - (z[0] - c.cx) ** 2 - (z[1] - c.cy) ** 2) / (2 * c.r) - z[2]
            )
        else:
            cons += [
                lambda z, c=reg: z[0] - c.x0 - z[2],
                lambda z, c=reg: c.x1 - z[0] - z[2],
                lambda z, c=reg: z[1] - c.y0 - z[2],
                lambda z, c=reg: c.y1 - z[1] - z[2],
            ]
    res = minimize(
        lambda z: -z[2],
        np.array([x0[0], x0[1], -scale]),
        jac=lambda z: np.array([0.0, 0.0, -1.0]),
        constraints=[{"type": "ineq", "fun": f} for f in cons],
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 200},
    )
    p = (float(res.x[0]), float(res.x[1]))
    return all(reg.contains(p) for reg in regions)


def intersects(a: Region, b: Region) -> bool:
    """Whether two open regions share a point."""
    if isinstance(a, Rect) and isinstance(b, Rect):
        return _rect_meet([a, b]) is not None
    if isinstance(a, Disk) and isinstance(b, Disk):
        return math.hypot(a.cx - b.cx, a.cy - b.cy) < a.r + b.r
    rect, disk = (a, b) if isinstance(a, Rect) else (b, a)
    return _rect_disk_meet(rect, disk)


def triple_intersects(a: Region, b: Region, c: Region) -> bool:
    regions = (a, b, c)
    rects = [r for r in regions if isinstance(r, Rect)]
    disks = [r for r in regions if isinstance(r, Disk)]
    if rects:
        meet = _rect_meet(rects)
        if meet is None:
            return False
        if not disks:
            return True
        if len(disks) == 1:
            return _rect_disk_meet(meet, disks[0])
        regions = (meet, *disks)
    if not all(intersects(p, q) for p, q in combinations(regions, 2)):
        return False
    return _witness_search(regions)


@dataclass(frozen=True, eq=False)
class Polyline:
    """A polyline parameterized by normalized arc length over ``[0, 1]``."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
            raise InvalidInput("a polyline needs at least two planar vertices")
        seg = np.hypot(*np.diff(v, axis=0).T)
        if not np.all(seg > 0):
            raise InvalidInput("consecutive polyline vertices must be distinct")
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        params = cum / cum[-1]
        params[-1] = 1.0
        v.setflags(write=False)
        params.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_params", params)

    @property
    def params(self) -> np.ndarray:
        """Parameter value of each vertex."""
        return self._params

    @property
    def start(self):
        return tuple(self.vertices[0])

    @property
    def end(self):
        return tuple(self.vertices[-1])

    def segment_index(self, t: float) -> int:
        """Index ``k`` of the segment ``[params[k], params[k+1])`` holding ``t``."""
        k = int(np.searchsorted(self._params, t, side="right")) - 1
        return min(max(k, 0), len(self._params) - 2)

    def point(self, t: float):
        if t <= 0.0:
            return tuple(self.vertices[0])
        if t >= 1.0:
            return tuple(self.vertices[-1])
        k = self.segment_index(t)
        t0, t1 = self._params[k], self._params[k + 1]
        lam = (t - t0) / (t1 - t0)
        a, b = self.vertices[k], self.vertices[k + 1]
        return (float(a[0] + lam * (b[0] - a[0])), float(a[1] + lam * (b[1] - a[1])))

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1])

    @classmethod
    def from_json(cls, obj: Mapping) -> "Polyline":
        try:
            return cls(obj["vertices"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"bad polyline document: {exc}") from exc

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist()}


class GeomCover:
    """Named open regions; the abstract :class:`Cover` is derived from geometry."""

    def __init__(self, charts: Mapping[str, Region]):
        if not charts:
            raise InvalidInput("a geometric cover needs at least one chart")
        self.charts = {str(k): charts[k] for k in sorted(charts)}
        self._cover = None

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self.charts)

    @property
    def cover(self) -> Cover:
        if self._cover is None:
            ids = self.ids
            adj = {i: set() for i in ids}
            pairs = []
            for a, b in combinations(ids, 2):
                if intersects(self.charts[a], self.charts[b]):
                    pairs.append((a, b))
                    adj[a].add(b)
                    adj[b].add(a)
            triples = []
            for a, b in pairs:
                for c in sorted(adj[a] & adj[b]):
                    if c > b and triple_intersects(self.charts[a], self.charts[b], self.charts[c]):
                        triples.append((a, b, c))
            self._cover = Cover(ids, pairs, triples)
        return self._cover

    def charts_containing(self, p) -> list[str]:
        return [i for i, reg in self.charts.items() if reg.contains(p)]

    @classmethod
    def from_json(cls, obj: Mapping) -> "GeomCover":
        try:
            charts = obj["charts"]
        except (KeyError, TypeError):
            raise InvalidInput("geometric cover document needs a 'charts' object") from None
        return cls({k: region_from_json(v) for k, v in charts.items()})

    def to_json(self) -> dict:
        return {"charts": {k: r.to_json() for k, r in self.charts.items()}}
