"""Shared fixtures and independent oracles for the test suite."""

from collections import deque
from itertools import combinations

import numpy as np
from hypothesis import strategies as st

from cocycle import Coupling, Cover, GeomCover, Rect


def random_cover(rng, n_nodes, n_edges, triple_fraction=0.5):
    """Connected random cover; identifiers are shuffled so that sorted order
    differs from construction order."""
    labels = [f"U{k:03d}" for k in rng.permutation(n_nodes)]
    edges = set()
    for i in range(1, n_nodes):
        j = int(rng.integers(0, i))
        edges.add(tuple(sorted((labels[i], labels[j]))))
    max_edges = n_nodes * (n_nodes - 1) // 2
    target = min(n_edges, max_edges)
    while len(edges) < target:
        a, b = rng.choice(n_nodes, size=2, replace=False)
        edges.add(tuple(sorted((labels[a], labels[b]))))
    adj = {lab: set() for lab in labels}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    triangles = sorted(
        tuple(sorted((a, b, c))) for a, b in edges for c in adj[a] & adj[b] if c > b
    )
    triples = [t for t in triangles if rng.random() < triple_fraction]
    return Cover(labels, edges, triples)


@st.composite
def connected_covers(draw, max_nodes=12):
    n = draw(st.integers(1, max_nodes))
    labels = draw(st.permutations([f"S{k:02d}" for k in range(n)]))
    edges = set()
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.add(tuple(sorted((labels[i], labels[j]))))
    all_pairs = [tuple(sorted(p)) for p in combinations(labels, 2)]
    extra = draw(st.lists(st.sampled_from(all_pairs), max_size=2 * n)) if all_pairs else []
    edges.update(extra)
    adj = {lab: set() for lab in labels}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    triangles = sorted(
        tuple(sorted((a, b, c))) for a, b in edges for c in adj[a] & adj[b] if c > b
    )
    triples = [t for t in triangles if draw(st.booleans())]
    return Cover(labels, edges, triples)


primitive_values = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def annulus_cover():
    return Cover("ABCD", [("A", "B"), ("B", "C"), ("C", "D"), ("A", "D")])


def annulus_coupling():
    return Coupling.from_oriented([("A", "B", 1), ("B", "C", 1), ("C", "D", 1), ("D", "A", 1)])


def annulus_geomcover():
    """Four bands around the hole [1.1, 1.9]^2 of the square [0, 3]^2; consecutive
    bands overlap in a corner square, opposite bands are disjoint."""
    return GeomCover(
        {
            "A": Rect(-0.1, -0.1, 3.1, 1.1),  # bottom
            "B": Rect(1.9, -0.1, 3.1, 3.1),  # right
            "C": Rect(-0.1, 1.9, 3.1, 3.1),  # top
            "D": Rect(-0.1, -0.1, 1.1, 3.1),  # left
        }
    )


def square_grid_cover(n=10, pad=0.3):
    """``n x n`` unit cells, each widened by ``pad``, covering ``[0, n]^2``."""
    charts = {}
    for i in range(n):
        for j in range(n):
            charts[f"s{i}_{j}"] = Rect(j - pad, i - pad, j + 1 + pad, i + 1 + pad)
    return GeomCover(charts)


def bfs_integrate(mask, gx, gy, h, start=None):
    """Trapezoid integration along a breadth-first tree of the whole mask."""
    H, W = mask.shape
    if start is None:
        start = tuple(np.argwhere(mask)[-1])
    F = np.full(mask.shape, np.nan)
    F[start] = 0.0
    queue = deque([start])
    while queue:
        i, j = queue.popleft()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + di, j + dj
            if 0 <= a < H and 0 <= b < W and mask[a, b] and np.isnan(F[a, b]):
                comp = gy if di else gx
                step = 0.5 * h * (comp[i, j] + comp[a, b])
                F[a, b] = F[i, j] + (di + dj) * step
                queue.append((a, b))
    return F


def aligned_max_error(a, b, mask):
    diff = (a - b)[mask]
    return float(np.max(np.abs(diff - diff.mean())))
