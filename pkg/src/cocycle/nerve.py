"""Finite covers, their nerve graphs and fundamental cycle bases.

Cover sets are opaque string identifiers.  Everything that depends on an order
(components, spanning forests, cycle orientation) uses the lexicographic order
of identifiers so that results are reproducible.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import DuplicateIdentifier, MalformedCover, UnknownIdentifierInPair

__all__ = [
    "Cover",
    "NerveGraph",
    "CycleBasis",
    "SpanningForest",
    "build_nerve",
    "spanning_forest",
    "cycle_basis",
]


def _sorted_tuple(items, size):
    t = tuple(sorted(items))
    if len(t) != size or len(set(t)) != size:
        raise MalformedCover(f"expected {size} distinct identifiers, got {list(items)}")
    return t


@dataclass(frozen=True)
class Cover:
    """A finite cover described by its sets, intersecting pairs and triples.

    ``pairs`` and ``triples`` are stored as sorted tuples.  A triple declares
    ``U & V & W != {}``, which implies all three of its pairs intersect; the
    constructor enforces that.
    """

    sets: tuple[str, ...]
    pairs: frozenset[tuple[str, str]] = frozenset()
    triples: frozenset[tuple[str, str, str]] = frozenset()

    def __init__(self, sets: Iterable[str], pairs=(), triples=()):
        sets = tuple(sets)
        seen = set()
        for s in sets:
            if not isinstance(s, str):
                raise MalformedCover(f"identifier {s!r} is not a string")
            if s in seen:
                raise DuplicateIdentifier(s)
            seen.add(s)
        norm_pairs = set()
        for p in pairs:
            p = _sorted_tuple(p, 2)
            for ident in p:
                if ident not in seen:
                    raise UnknownIdentifierInPair(ident, p)
            norm_pairs.add(p)
        norm_triples = set()
        for t in triples:
            t = _sorted_tuple(t, 3)
            for ident in t:
                if ident not in seen:
                    raise UnknownIdentifierInPair(ident, t)
            for sub in combinations(t, 2):
                if sub not in norm_pairs:
                    raise MalformedCover(
                        f"triple {list(t)} is declared but pair {list(sub)} is not"
                    )
            norm_triples.add(t)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "pairs", frozenset(norm_pairs))
        object.__setattr__(self, "triples", frozenset(norm_triples))

    def __len__(self):
        return len(self.sets)

    @classmethod
    def from_json(cls, obj: Mapping) -> "Cover":
        try:
            return cls(obj["sets"], obj.get("pairs", ()), obj.get("triples", ()))
        except (KeyError, TypeError) as exc:
            raise MalformedCover(f"bad cover document: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "sets": list(self.sets),
            "pairs": [list(p) for p in sorted(self.pairs)],
            "triples": [list(t) for t in sorted(self.triples)],
        }


@dataclass(frozen=True)
class NerveGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    adjacency: Mapping[str, tuple[str, ...]] = field(repr=False)
    components: tuple[tuple[str, ...], ...]

    def component_of(self, node: str) -> tuple[str, ...]:
        for comp in self.components:
            if node in comp:
                return comp
        raise KeyError(node)


def build_nerve(cover: Cover) -> NerveGraph:
    """Realize the intersecting pairs of ``cover`` as an undirected graph.

    Components are found by breadth-first traversal, starting each one at the
    smallest unvisited identifier and visiting neighbours in sorted order.
    Each component is returned sorted.
    """
    nodes = tuple(sorted(cover.sets))
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in cover.pairs:
        adj[a].append(b)
        adj[b].append(a)
    adjacency = {n: tuple(sorted(nb)) for n, nb in adj.items()}

    seen: set[str] = set()
    components = []
    for root in nodes:
        if root in seen:
            continue
        seen.add(root)
        comp = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        components.append(tuple(sorted(comp)))
    return NerveGraph(
        nodes=nodes,
        edges=tuple(sorted(cover.pairs)),
        adjacency=adjacency,
        components=tuple(components),
    )


@dataclass(frozen=True)
class SpanningForest:
    """Breadth-first spanning forest; ``parent[root]`` is ``None``."""

    roots: tuple[str, ...]
    parent: Mapping[str, str | None]
    depth: Mapping[str, int]
    order: tuple[str, ...]  # nodes in visiting order, parents before children

    @property
    def tree_edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(
            sorted(tuple(sorted((v, p))) for v, p in self.parent.items() if p is not None)
        )

    def path_to_root(self, node: str) -> list[str]:
        path = [node]
        while (p := self.parent[path[-1]]) is not None:
            path.append(p)
        return path


def spanning_forest(
    nerve: NerveGraph,
    roots: Mapping[int, str] | Sequence[str] | None = None,
    seed: int | None = None,
) -> SpanningForest:
    """Breadth-first spanning forest of ``nerve``.

    Each component is rooted at the matching entry of ``roots`` (one root per
    component, in component order) or at its smallest identifier.  Neighbours
    are visited in sorted order; a ``seed`` shuffles the neighbour order
    instead, which yields a different but equally valid forest.
    """
    rng = random.Random(seed) if seed is not None else None
    if roots is None:
        roots = [comp[0] for comp in nerve.components]
    roots = tuple(roots)
    if len(roots) != len(nerve.components):
        raise ValueError("need exactly one root per component")

    parent: dict[str, str | None] = {}
    depth: dict[str, int] = {}
    order: list[str] = []
    for root in roots:
        parent[root] = None
        depth[root] = 0
        order.append(root)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            nbrs = nerve.adjacency[u]
            if rng is not None:
                nbrs = list(nbrs)
                rng.shuffle(nbrs)
            for v in nbrs:
                if v not in parent:
                    parent[v] = u
                    depth[v] = depth[u] + 1
                    order.append(v)
                    queue.append(v)
    return SpanningForest(roots=roots, parent=parent, depth=depth, order=tuple(order))


@dataclass(frozen=True)
class CycleBasis:
    """Fundamental cycles of a spanning forest.

    Each cycle is a tuple of nodes ``(v0, v1, ..., vk)`` describing the closed
    walk ``v0 -> v1 -> ... -> vk -> v0``.  It runs from the lowest common
    ancestor down the tree to the smaller endpoint of its non-tree edge,
    crosses that edge, and climbs back.
    """

    cycles: tuple[tuple[str, ...], ...]
    tree_edges: tuple[tuple[str, str], ...]
    non_tree_edges: tuple[tuple[str, str], ...]

    def __len__(self):
        return len(self.cycles)

    @staticmethod
    def oriented_edges(cycle: Sequence[str]) -> list[tuple[str, str]]:
        n = len(cycle)
        return [(cycle[i], cycle[(i + 1) % n]) for i in range(n)]


def fundamental_cycle(forest: SpanningForest, u: str, v: str) -> tuple[str, ...]:
    """The cycle closed by the non-tree edge ``u - v``, oriented ``u -> v``."""
    up_u = [u]
    up_v = [v]
    a, b = u, v
    while forest.depth[a] > forest.depth[b]:
        a = forest.parent[a]
        up_u.append(a)
    while forest.depth[b] > forest.depth[a]:
        b = forest.parent[b]
        up_v.append(b)
    while a != b:
        a = forest.parent[a]
        b = forest.parent[b]
        up_u.append(a)
        up_v.append(b)
    # up_u: u .. lca, up_v: v .. lca
    down = up_u[::-1]  # lca .. u
    return tuple(down + up_v[:-1])


def cycle_basis(
    nerve: NerveGraph,
    forest: SpanningForest | None = None,
    seed: int | None = None,
) -> CycleBasis:
    """One fundamental cycle per non-tree edge of a spanning forest.

    With no ``forest`` given, the canonical breadth-first forest (rooted at
    each component's smallest identifier) is used.  Cycles come in sorted
    order of their non-tree edges.
    """
    if forest is None:
        forest = spanning_forest(nerve, seed=seed)
    tree = set(forest.tree_edges)
    non_tree = tuple(e for e in nerve.edges if e not in tree)
    cycles = tuple(fundamental_cycle(forest, u, v) for u, v in non_tree)
    return CycleBasis(cycles=cycles, tree_edges=forest.tree_edges, non_tree_edges=non_tree)
