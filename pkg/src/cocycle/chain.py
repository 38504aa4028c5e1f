"""Chart chains along polylines and their coupling sums.

A chain for a path splits ``[0, 1]`` at breakpoints ``0 = t0 < ... < tn = 1``
and assigns each piece a chart containing it.  Summing the coupling over
consecutive charts gives a number that does not depend on the chosen chain
when the coupling is compatible, and does not change under small
deformations of the path with fixed endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .coupling import Coupling
from .errors import InvalidChain, NoProgress, NonAdjacentConsecutiveCharts, PathNotCovered
from .geometry import GeomCover, Polyline, Region

__all__ = [
    "MIN_STEP",
    "Chain",
    "build_chain",
    "chain_sum",
    "endpoint_charts",
    "homotopy_sweep",
]

MIN_STEP = 1e-12


@dataclass(frozen=True)
class Chain:
    breakpoints: tuple[float, ...]
    charts: tuple[str, ...]

    def __post_init__(self):
        bp = tuple(float(t) for t in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "charts", tuple(self.charts))
        if len(bp) != len(self.charts) + 1 or not self.charts:
            raise InvalidChain("need n >= 1 charts and n + 1 breakpoints")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise InvalidChain("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(bp, bp[1:])):
            raise InvalidChain("breakpoints must increase strictly")

    def __len__(self):
        return len(self.charts)

    def segment_ok(self, cover: GeomCover, path: Polyline, k: int, chart: str | None = None) -> bool:
        """Whether piece ``k`` lies in ``chart`` (default: its own chart).

        Regions are convex, so it suffices to test the piece's endpoints and
        the polyline vertices strictly between them.
        """
        region = cover.charts[self.charts[k] if chart is None else chart]
        t0, t1 = self.breakpoints[k], self.breakpoints[k + 1]
        if not (region.contains(path.point(t0)) and region.contains(path.point(t1))):
            return False
        inner = [v for v, t in zip(path.vertices, path.params) if t0 < t < t1]
        return all(region.contains(v) for v in inner)

    def is_valid(self, cover: GeomCover, path: Polyline) -> bool:
        return all(self.segment_ok(cover, path, k) for k in range(len(self)))

    def refine(self, k: int, s: float) -> "Chain":
        """Split piece ``k`` at ``s``; both halves keep the same chart."""
        t0, t1 = self.breakpoints[k], self.breakpoints[k + 1]
        if not t0 < s < t1:
            raise InvalidChain(f"refinement point {s} is outside piece {k}")
        bp = self.breakpoints[: k + 1] + (s,) + self.breakpoints[k + 1 :]
        charts = self.charts[: k + 1] + self.charts[k:]
        return Chain(bp, charts)

    def replace(self, k: int, chart: str) -> "Chain":
        charts = self.charts[:k] + (chart,) + self.charts[k + 1 :]
        return Chain(self.breakpoints, charts)

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "charts": list(self.charts)}


def _exit_param(region: Region, path: Polyline, t: float) -> tuple[float, bool]:
    """First parameter after ``t`` at which ``path`` leaves ``region``.

    Returns ``(1.0, True)`` when the path stays inside through its end.
    """
    verts, params = path.vertices, path.params
    last = len(verts) - 1
    if t >= 1.0:
        return 1.0, True
    k = path.segment_index(t)
    p = path.point(t)
    tp = t
    while True:
        b = verts[k + 1]
        s = region.segment_exit(p, b)
        if s >= 1.0 and region.contains(b):
            if k + 1 == last:
                return 1.0, True
            k += 1
            p, tp = b, float(params[k])
            continue
        return tp + s * (float(params[k + 1]) - tp), False


def _entry_param(region: Region, path: Polyline, reverse: Polyline, t: float) -> float:
    """Last parameter before ``t`` at which ``path`` enters ``region``."""
    s, whole = _exit_param(region, reverse, 1.0 - t)
    return 0.0 if whole else 1.0 - s


def build_chain(cover: GeomCover, path: Polyline) -> Chain:
    """Greedy chain: from ``t``, take the chart that keeps the path longest.

    Ties go to the smallest identifier.  The next breakpoint is placed
    midway between the chart's exit point and where the best chart around
    that exit point is entered, so every breakpoint sits strictly inside two
    charts.
    """
    reverse = path.reversed()
    t = 0.0
    breaks = [0.0]
    charts: list[str] = []
    while True:
        here = path.point(t)
        cands = cover.charts_containing(here)
        if not cands:
            raise PathNotCovered(t, here)
        best, best_exit, best_whole = None, -1.0, False
        for c in cands:
            e, whole = _exit_param(cover.charts[c], path, t)
            if (whole, e) > (best_whole, best_exit):
                best, best_exit, best_whole = c, e, whole
        charts.append(best)
        if best_whole:
            breaks.append(1.0)
            return Chain(breaks, charts)

        e = best_exit
        q = path.point(e)
        nxt = cover.charts_containing(q)
        if not nxt:
            raise PathNotCovered(e, q)
        pick, pick_key = None, None
        for c in nxt:
            reach, whole = _exit_param(cover.charts[c], path, e)
            if pick_key is None or (whole, reach) > pick_key:
                pick, pick_key = c, (whole, reach)
        lo = max(t, _entry_param(cover.charts[pick], path, reverse, e))
        t_next = 0.5 * (lo + e)
        if t_next - t < MIN_STEP:
            raise NoProgress(t)
        breaks.append(t_next)
        t = t_next


def chain_sum(d: Coupling, chain: Chain, start: str, end: str) -> float:
    """Sum of ``d`` over consecutive charts of ``start, U1, ..., Un, end``."""
    seq = (start, *chain.charts, end)
    terms = []
    for a, b in zip(seq, seq[1:]):
        if a == b:
            continue
        try:
            terms.append(d.values[a, b])
        except KeyError:
            raise NonAdjacentConsecutiveCharts((a, b)) from None
    return math.fsum(terms)


def endpoint_charts(cover: GeomCover, path: Polyline) -> tuple[str, str]:
    """Smallest chart identifiers containing the path's start and end points."""
    out = []
    for t in (0.0, 1.0):
        p = path.point(t)
        found = cover.charts_containing(p)
        if not found:
            raise PathNotCovered(t, p)
        out.append(found[0])
    return out[0], out[1]


def homotopy_sweep(
    cover: GeomCover,
    d: Coupling,
    family: Sequence[Polyline],
    start: str | None = None,
    end: str | None = None,
) -> list[float]:
    """Chain sums of every path of a fixed-endpoint family.

    The start and end charts default to those of the first path and are
    shared by the whole family.
    """
    if not family:
        return []
    if start is None or end is None:
        s0, e0 = endpoint_charts(cover, family[0])
        start = s0 if start is None else start
        end = e0 if end is None else end
    return [chain_sum(d, build_chain(cover, path), start, end) for path in family]
