"""Primitives of couplings, and holonomy certificates when none exists.

A primitive is built by summing ``d`` along breadth-first spanning-tree paths
from a base set in each component.  This works exactly when every
fundamental cycle of that tree has vanishing holonomy (the signed sum of
``d`` around the cycle). Otherwise the holonomies are the obstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .coupling import Coupling, require_known_ids
from .errors import (
    AntisymmetryViolation,
    MissingPairValue,
    Obstructed,
    UnknownBaseIdentifier,
)
from .nerve import Cover, NerveGraph, build_nerve, cycle_basis, spanning_forest

__all__ = [
    "Primitive",
    "HolonomyEntry",
    "HolonomyReport",
    "cycle_threshold",
    "holonomy",
    "solve_primitive",
    "component_primitives",
]


@dataclass(frozen=True)
class Primitive:
    """Values ``C[U]`` per cover set, zero at the base of every component."""

    values: Mapping[str, float]
    bases: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        object.__setattr__(self, "bases", tuple(self.bases))

    @property
    def base(self) -> str | None:
        return self.bases[0] if self.bases else None

    def __getitem__(self, ident: str) -> float:
        return self.values[ident]

    def to_json(self) -> dict:
        out = {"base": self.base, "values": {k: self.values[k] for k in sorted(self.values)}}
        if len(self.bases) > 1:
            out["bases"] = list(self.bases)
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "Primitive":
        bases = obj.get("bases") or ([obj["base"]] if obj.get("base") is not None else [])
        return cls({str(k): float(v) for k, v in obj["values"].items()}, bases)


@dataclass(frozen=True)
class HolonomyEntry:
    nodes: tuple[str, ...]
    holonomy: float
    threshold: float

    @property
    def flagged(self) -> bool:
        return abs(self.holonomy) > self.threshold


@dataclass(frozen=True)
class HolonomyReport:
    entries: tuple[HolonomyEntry, ...]

    @property
    def max_abs_holonomy(self) -> float:
        return max((abs(e.holonomy) for e in self.entries), default=0.0)

    @property
    def obstructed(self) -> bool:
        return any(e.flagged for e in self.entries)

    @property
    def holonomies(self) -> list[float]:
        return [e.holonomy for e in self.entries]

    def to_json(self) -> dict:
        return {
            "cycles": [{"nodes": list(e.nodes), "holonomy": e.holonomy} for e in self.entries],
            "max": self.max_abs_holonomy,
        }


def cycle_threshold(tol: float, summands) -> float:
    """Obstruction threshold for one cycle.

    Rounding in a sum of ``L`` terms can reach a few ulps of the largest
    term per addition, so long cycles get ``L * 4 ulp`` of slack when that
    exceeds ``tol``.
    """
    summands = list(summands)
    if not summands:
        return tol
    largest = max(abs(x) for x in summands)
    return max(tol, len(summands) * 4 * math.ulp(largest))


def _cycle_entry(d: Coupling, cycle, tol: float) -> HolonomyEntry:
    n = len(cycle)
    terms = []
    for i in range(n):
        pair = (cycle[i], cycle[(i + 1) % n])
        try:
            terms.append(d.values[pair])
        except KeyError:
            raise MissingPairValue(pair) from None
    return HolonomyEntry(tuple(cycle), math.fsum(terms), cycle_threshold(tol, terms))


def holonomy(cover: Cover, d: Coupling, tol: float | None = None, seed=None) -> HolonomyReport:
    """Holonomy of ``d`` around each fundamental cycle of the canonical cycle basis."""
    tol = d.tolerance if tol is None else tol
    require_known_ids(cover, d)
    nerve = build_nerve(cover)
    basis = cycle_basis(nerve, seed=seed)
    return HolonomyReport(tuple(_cycle_entry(d, c, tol) for c in basis.cycles))


def _check_antisymmetry(nerve: NerveGraph, d: Coupling, tol: float):
    vals = d.values
    for u, v in nerve.edges:
        try:
            r = abs(vals[u, v] + vals[v, u])
        except KeyError:
            missing = (u, v) if (u, v) not in vals else (v, u)
            raise MissingPairValue(missing) from None
        if r > tol:
            raise AntisymmetryViolation((u, v), r)


def _resolve_roots(nerve: NerveGraph, base: str | None) -> list[str]:
    roots = [comp[0] for comp in nerve.components]
    if base is not None:
        if base not in nerve.adjacency:
            raise UnknownBaseIdentifier(base)
        for i, comp in enumerate(nerve.components):
            if base in comp:
                roots[i] = base
    return roots


def _screen(forest, d: Coupling, values, non_tree, tol: float) -> bool:
    """Cheap certificate that no fundamental cycle is flagged.

    The holonomy of the cycle closed by ``u -> v`` equals
    ``d[u, v] - (C[v] - C[u])`` up to the rounding of the tree sums behind
    ``C``, which is bounded by a few ulps of the largest partial sum per
    tree edge.
    """
    vals = d.values
    big = max((abs(x) for x in values.values()), default=0.0)
    for u, v in non_tree:
        r = abs(vals[u, v] - (values[v] - values[u]))
        slack = (forest.depth[u] + forest.depth[v] + 1) * 4 * math.ulp(max(big, abs(vals[u, v])))
        if r + slack > tol:
            return False
    return True


def _solve(nerve: NerveGraph, d: Coupling, roots, tol: float, seed):
    """Tree-sum primitive and, unless screened clean, the exact cycle report."""
    forest = spanning_forest(nerve, roots=roots, seed=seed)
    values: dict[str, float] = {}
    vals = d.values
    for node in forest.order:
        p = forest.parent[node]
        values[node] = 0.0 if p is None else values[p] + vals[p, node]
    basis = cycle_basis(nerve, forest=forest)
    if _screen(forest, d, values, basis.non_tree_edges, tol):
        return values, HolonomyReport(())
    return values, HolonomyReport(tuple(_cycle_entry(d, c, tol) for c in basis.cycles))


def solve_primitive(
    cover: Cover,
    d: Coupling,
    base: str | None = None,
    tol: float | None = None,
    seed: int | None = None,
) -> Primitive:
    """Compute a primitive of ``d`` or raise :class:`Obstructed`.

    ``base`` chooses the zero of its own component; every other component is
    normalized at its smallest identifier.  The holonomy test runs on the
    fundamental cycles of the same spanning forest used to build ``C``, so a
    returned primitive reproduces ``d`` on non-tree edges up to those
    holonomies.  ``seed`` randomizes neighbour order in the forest and exists
    for testing tree independence.
    """
    tol = d.tolerance if tol is None else tol
    require_known_ids(cover, d)
    nerve = build_nerve(cover)
    _check_antisymmetry(nerve, d, tol)
    roots = _resolve_roots(nerve, base)
    values, report = _solve(nerve, d, roots, tol, seed)
    if report.obstructed:
        raise Obstructed(report)
    return Primitive({s: values[s] for s in cover.sets}, roots)


def component_primitives(
    cover: Cover, d: Coupling, tol: float | None = None
) -> list[Primitive]:
    """One primitive per connected component, in component order.

    Raises :class:`Obstructed` carrying only the first obstructed
    component's cycles.
    """
    tol = d.tolerance if tol is None else tol
    require_known_ids(cover, d)
    nerve = build_nerve(cover)
    _check_antisymmetry(nerve, d, tol)
    out = []
    for comp in nerve.components:
        members = set(comp)
        sub = Cover(comp, [p for p in cover.pairs if p[0] in members])
        sub_nerve = build_nerve(sub)
        values, report = _solve(sub_nerve, d, [comp[0]], tol, None)
        if report.obstructed:
            raise Obstructed(report)
        out.append(Primitive({s: values[s] for s in comp}, [comp[0]]))
    return out
