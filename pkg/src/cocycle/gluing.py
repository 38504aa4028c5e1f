"""Local-to-global gluing of sampled scalar data on masked grids.

Two pipelines share the same core:

* :func:`glue_functions` takes functions sampled on overlapping patches whose
  pairwise differences are constant on overlaps, and returns one global
  function that differs from each patch by a constant.
* :func:`poincare_reconstruct` integrates a curl-free vector field on each
  rectangle of a cover, then glues the local potentials the same way.  If
  the mask has holes around which the field circulates, the gluing step
  fails with the circulations as holonomies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from ._parallel import thread_map
from .coupling import DEFAULT_TOL, Coupling, validate_compatibility
from .errors import (
    CurlNotZero,
    DisconnectedRectangle,
    EmptyOverlapSamples,
    IncompatibleCoupling,
    InconsistentGlue,
    InvalidInput,
    NotConstantOnOverlap,
)
from .geometry import Rect
from .grid import GridDomain, ScalarField, VectorField
from .nerve import Cover
from .solver import Primitive, solve_primitive

__all__ = [
    "Chart",
    "Patch",
    "LocalFunctionFamily",
    "tile_charts",
    "discrete_curl",
    "extract_coupling",
    "glue_functions",
    "local_potentials",
    "poincare_reconstruct",
    "gradient_mismatch",
    "consistent_gradient",
]

log = logging.getLogger(__name__)

DEFAULT_TILE = 8


@dataclass(frozen=True, eq=False)
class Chart:
    """A chart on the grid: a region and the masked nodes it owns."""

    region: Rect | None
    nodes: np.ndarray


@dataclass(frozen=True, eq=False)
class Patch:
    """Samples ``values`` of one local function on the nodes of its chart."""

    region: Rect | None
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=bool)
        values = np.array(self.values, dtype=float)
        if nodes.shape != values.shape:
            raise InvalidInput("patch nodes and values differ in shape")
        if not nodes.any():
            raise InvalidInput("patch has no nodes")
        if not np.all(np.isfinite(values[nodes])):
            raise InvalidInput("patch is missing samples on its nodes")
        values[~nodes] = np.nan
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)


def _bbox(nodes):
    rows = np.flatnonzero(nodes.any(axis=1))
    cols = np.flatnonzero(nodes.any(axis=0))
    return rows[0], rows[-1], cols[0], cols[-1]


def _boxes_meet(a, b):
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]


@dataclass(eq=False)
class LocalFunctionFamily:
    """Patches keyed by chart identifier, all on one grid.

    The nerve comes from shared sample nodes: two patches intersect when
    they share a node, three when all three share one.
    """

    domain: GridDomain
    patches: Mapping[str, Patch]
    _cover: Cover | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.patches:
            raise InvalidInput("a function family needs at least one patch")
        self.patches = {k: self.patches[k] for k in sorted(self.patches)}
        for k, p in self.patches.items():
            if p.nodes.shape != self.domain.shape:
                raise InvalidInput(f"patch {k!r} does not match the grid shape")
            if p.region is not None:
                inside = self.domain.nodes_in(p.region)
                if np.any(inside & ~p.nodes):
                    raise InvalidInput(f"patch {k!r} lacks samples at masked nodes of its chart")

    @classmethod
    def from_samples(cls, domain: GridDomain, charts: Mapping[str, Rect | Chart], fn) -> "LocalFunctionFamily":
        """Sample ``fn(ident, x, y)`` on each chart's masked nodes."""
        x, y = domain.coords()
        patches = {}
        for ident, chart in charts.items():
            chart = _as_chart(domain, chart)
            vals = np.where(chart.nodes, fn(ident, x, y), np.nan)
            patches[ident] = Patch(chart.region, chart.nodes, vals)
        return cls(domain, patches)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self.patches)

    def overlap(self, a: str, b: str) -> np.ndarray:
        return self.patches[a].nodes & self.patches[b].nodes

    def cover(self) -> Cover:
        if self._cover is None:
            ids = self.ids
            boxes = {k: _bbox(self.patches[k].nodes) for k in ids}
            adj = {k: set() for k in ids}
            pairs = []
            for a, b in combinations(ids, 2):
                if _boxes_meet(boxes[a], boxes[b]) and self.overlap(a, b).any():
                    pairs.append((a, b))
                    adj[a].add(b)
                    adj[b].add(a)
            triples = []
            for a, b in pairs:
                ab = None
                for c in sorted(adj[a] & adj[b]):
                    if c <= b:
                        continue
                    if ab is None:
                        ab = self.overlap(a, b)
                    if (ab & self.patches[c].nodes).any():
                        triples.append((a, b, c))
            self._cover = Cover(ids, pairs, triples)
        return self._cover

    def union(self) -> np.ndarray:
        out = np.zeros(self.domain.shape, bool)
        for p in self.patches.values():
            out |= p.nodes
        return out


def _as_chart(domain: GridDomain, chart) -> Chart:
    if isinstance(chart, Chart):
        return chart
    if isinstance(chart, Rect):
        return Chart(chart, domain.nodes_in(chart))
    raise InvalidInput(f"expected a Rect or Chart, got {type(chart).__name__}")


def _normalize_charts(domain: GridDomain, charts) -> dict[str, Chart]:
    if isinstance(charts, Mapping):
        items = charts.items()
    else:
        items = ((f"r{k:03d}", c) for k, c in enumerate(charts))
    return {str(k): _as_chart(domain, c) for k, c in items}


def tile_charts(domain: GridDomain, k: int = DEFAULT_TILE) -> dict[str, Chart]:
    """Overlapping ``2k x 2k`` node tiles with stride ``k`` over the grid.

    Tiles without masked nodes are dropped.  A tile whose masked nodes fall
    apart into several 4-connected pieces yields one region-less chart per
    piece, suffixed ``.0``, ``.1``, ... .
    """
    if k < 1:
        raise InvalidInput("tile size k must be >= 1")
    size = 2 * k

    def starts(n):
        if n <= size:
            return [0]
        s = list(range(0, n - size + 1, k))
        if s[-1] != n - size:
            s.append(n - size)
        return s

    out: dict[str, Chart] = {}
    for r, i0 in enumerate(starts(domain.height)):
        for c, j0 in enumerate(starts(domain.width)):
            i1 = min(i0 + size, domain.height) - 1
            j1 = min(j0 + size, domain.width) - 1
            region = domain.node_rect(i0, j0, i1, j1)
            nodes = domain.nodes_in(region)
            if not nodes.any():
                continue
            labels, count = ndimage.label(nodes)
            name = f"t{r:03d}_{c:03d}"
            if count == 1:
                out[name] = Chart(region, nodes)
            else:
                # a piece owns only part of the rectangle's nodes, so it has no region
                for m in range(count):
                    out[f"{name}.{m}"] = Chart(None, labels == m + 1)
    return out


# -- coupling extraction and gluing ------------------------------------------------


def extract_coupling(
    family: LocalFunctionFamily, tol: float = DEFAULT_TOL, cover: Cover | None = None
) -> Coupling:
    """``d[U, V]`` = mean of ``f_V - f_U`` over the shared nodes.

    The standard deviation of that difference must not exceed ``tol``.
    An explicit ``cover`` may declare pairs; each one must then share
    sample nodes.
    """
    cover = family.cover() if cover is None else cover

    def one(pair):
        a, b = pair
        ov = family.overlap(a, b)
        if not ov.any():
            raise EmptyOverlapSamples(pair)
        diff = family.patches[b].values[ov] - family.patches[a].values[ov]
        mean = float(np.mean(diff))
        dev = float(np.std(diff))
        if dev > tol:
            raise NotConstantOnOverlap(pair, dev)
        return mean

    pairs = sorted(cover.pairs)
    means = thread_map(one, pairs)
    values = {}
    for (a, b), m in zip(pairs, means):
        values[a, b] = m
        values[b, a] = -m
    return Coupling(values, tol)


def _glue(family: LocalFunctionFamily, C: Primitive, tol: float) -> np.ndarray:
    out = np.full(family.domain.shape, np.nan)
    for ident, p in family.patches.items():
        fill = p.nodes & np.isnan(out)
        out[fill] = p.values[fill] - C[ident]
    for a, b in sorted(family.cover().pairs):
        ov = family.overlap(a, b)
        gap = (family.patches[a].values[ov] - C[a]) - (family.patches[b].values[ov] - C[b])
        dev = float(np.max(np.abs(gap)))
        if dev > tol:
            raise InconsistentGlue((a, b), dev)
    return out


def glue_functions(
    family: LocalFunctionFamily, tol: float = DEFAULT_TOL, base: str | None = None
) -> ScalarField:
    """One function ``f`` with ``f = f_U - C[U]`` on every patch ``U``.

    Raises :class:`~cocycle.errors.Obstructed` when the overlap constants
    have nonzero holonomy.  On overlaps the first patch in identifier order
    supplies the value; all others agree with it to within ``tol``.
    """
    cover = family.cover()
    d = extract_coupling(family, tol, cover)
    report = validate_compatibility(cover, d, tol)
    if not report.clean:
        raise IncompatibleCoupling(report)
    C = solve_primitive(cover, d, base=base, tol=tol)
    values = _glue(family, C, tol)
    domain = family.domain.with_mask(family.union())
    return ScalarField(domain, values)


# -- discrete Poincare lemma ----------------------------------------------------------


def discrete_curl(g: VectorField) -> np.ndarray:
    """Trapezoid circulation around each plaquette divided by its area.

    Entry ``[i, j]`` belongs to the plaquette with lower-left node ``(i, j)``;
    plaquettes touching an unmasked node are NaN.
    """
    gx, gy, h = g.gx, g.gy, g.domain.spacing
    circ = 0.5 * h * (
        (gx[:-1, :-1] + gx[:-1, 1:])
        + (gy[:-1, 1:] + gy[1:, 1:])
        - (gx[1:, :-1] + gx[1:, 1:])
        - (gy[:-1, :-1] + gy[1:, :-1])
    )
    return circ / (h * h)


def _integrate(nodes: np.ndarray, gx: np.ndarray, gy: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid potential on ``nodes``, zero at their first node (row-major).

    Sweeps the start row, then every column through the nodes reached,
    then rows again through newly reached nodes, until nothing changes.  On
    a full rectangle this is plain row-then-column integration.
    """
    H, W = nodes.shape
    F = np.full((H, W), np.nan)
    i0, j0 = np.argwhere(nodes)[0]
    F[i0, j0] = 0.0
    half = 0.5 * h

    def sweep_row(i, j):
        new = []
        row, frow, ok = gx[i], F[i], nodes[i]
        jj = j
        while jj + 1 < W and ok[jj + 1] and np.isnan(frow[jj + 1]):
            frow[jj + 1] = frow[jj] + half * (row[jj] + row[jj + 1])
            jj += 1
            new.append((i, jj))
        jj = j
        while jj - 1 >= 0 and ok[jj - 1] and np.isnan(frow[jj - 1]):
            frow[jj - 1] = frow[jj] - half * (row[jj - 1] + row[jj])
            jj -= 1
            new.append((i, jj))
        return new

    def sweep_col(i, j):
        new = []
        ii = i
        while ii + 1 < H and nodes[ii + 1, j] and np.isnan(F[ii + 1, j]):
            F[ii + 1, j] = F[ii, j] + half * (gy[ii, j] + gy[ii + 1, j])
            ii += 1
            new.append((ii, j))
        ii = i
        while ii - 1 >= 0 and nodes[ii - 1, j] and np.isnan(F[ii - 1, j]):
            F[ii - 1, j] = F[ii, j] - half * (gy[ii - 1, j] + gy[ii, j])
            ii -= 1
            new.append((ii, j))
        return new

    row_seeds = [(i0, j0)]
    col_seeds = [(i0, j0)]
    while row_seeds:
        for s in row_seeds:
            col_seeds.extend(sweep_row(*s))
        row_seeds = []
        for s in col_seeds:
            row_seeds.extend(sweep_col(*s))
        col_seeds = []
    return F


def local_potentials(
    domain: GridDomain,
    g: VectorField,
    charts: Sequence[Rect] | Mapping[str, Rect | Chart],
    tol: float = DEFAULT_TOL,
) -> LocalFunctionFamily:
    """Integrate ``g`` on every chart separately.

    Each chart's masked nodes must be 4-connected and every plaquette inside
    the chart must have ``|discrete_curl| <= tol``.
    """
    charts = _normalize_charts(domain, charts)
    curl = discrete_curl(g)
    h = domain.spacing

    def one(item):
        ident, chart = item
        nodes = chart.nodes & domain.mask
        if not nodes.any():
            raise InvalidInput(f"chart {ident!r} contains no masked nodes")
        if ndimage.label(nodes)[1] != 1:
            raise DisconnectedRectangle(ident)
        inner = nodes[:-1, :-1] & nodes[:-1, 1:] & nodes[1:, :-1] & nodes[1:, 1:]
        if inner.any():
            mags = np.where(inner, np.abs(curl), 0.0)
            worst = np.unravel_index(np.argmax(mags), mags.shape)
            if mags[worst] > tol:
                raise CurlNotZero(ident, worst, float(mags[worst]))
        return Patch(chart.region, nodes, _integrate(nodes, g.gx, g.gy, h))

    patches = thread_map(one, charts.items())
    return LocalFunctionFamily(domain, dict(zip(charts, patches)))


def gradient_mismatch(F: ScalarField, g: VectorField) -> float:
    """Largest ``|(F_b - F_a)/h - mean(g_a, g_b) . e|`` over masked grid edges."""
    h = g.domain.spacing
    worst = 0.0
    for axis, comp in ((1, g.gx), (0, g.gy)):
        dF = np.diff(F.values, axis=axis) / h
        avg = 0.5 * (comp[:-1, :] + comp[1:, :]) if axis == 0 else 0.5 * (comp[:, :-1] + comp[:, 1:])
        err = np.abs(dF - avg)
        err = err[np.isfinite(err)]
        if err.size:
            worst = max(worst, float(err.max()))
    return worst


def poincare_reconstruct(
    domain: GridDomain,
    g: VectorField,
    cover: Sequence[Rect] | Mapping[str, Rect | Chart] | None = None,
    tol: float = DEFAULT_TOL,
    tile: int = DEFAULT_TILE,
    base: str | None = None,
) -> ScalarField:
    """Potential ``F`` of a curl-free field, built from local rectangle potentials.

    Without an explicit ``cover`` the grid is tiled by :func:`tile_charts`.
    Raises :class:`~cocycle.errors.Obstructed` when the field circulates
    around holes of the mask.
    """
    charts = tile_charts(domain, tile) if cover is None else _normalize_charts(domain, cover)
    covered = np.zeros(domain.shape, bool)
    for chart in charts.values():
        covered |= chart.nodes
    missing = domain.mask & ~covered
    if missing.any():
        i, j = np.argwhere(missing)[0]
        raise InvalidInput(f"cover misses masked node (row, col)=({i}, {j})")
    family = local_potentials(domain, g, charts, tol)
    log.debug("poincare: %d charts, %d pairs", len(charts), len(family.cover().pairs))
    F = glue_functions(family, tol, base)
    F = ScalarField(domain, F.values)
    mismatch = gradient_mismatch(F, g)
    if mismatch > tol:
        raise InconsistentGlue(("gradient",), mismatch)
    return F


def consistent_gradient(
    domain: GridDomain, potential: np.ndarray, gx: np.ndarray, gy: np.ndarray
) -> VectorField:
    """Nudge sampled gradients so trapezoid integration reproduces ``potential``.

    ``potential``, ``gx`` and ``gy`` are full-grid arrays.  Along each grid
    row (column) the smallest correction ``c`` with
    ``h (c_a + c_b) / 2 = F_b - F_a - h (g_a + g_b) / 2`` is added to ``gx``
    (``gy``).  The result is exactly curl-free in the trapezoid sense, up to
    rounding.
    """
    h = domain.spacing
    F = np.asarray(potential, float)

    def fix(g_line, f_line):
        n = len(g_line)
        rhs = 2.0 * np.diff(f_line) / h - (g_line[:-1] + g_line[1:])
        A = np.zeros((n - 1, n))
        A[np.arange(n - 1), np.arange(n - 1)] = 1.0
        A[np.arange(n - 1), np.arange(1, n)] = 1.0
        c = np.linalg.lstsq(A, rhs, rcond=None)[0]
        return g_line + c

    gx = np.array([fix(np.asarray(gx[i], float), F[i]) for i in range(domain.height)])
    gy = np.array([fix(np.asarray(gy[:, j], float), F[:, j]) for j in range(domain.width)]).T
    gx = np.where(domain.mask, gx, np.nan)
    gy = np.where(domain.mask, gy, np.nan)
    return VectorField(domain, gx, gy)
