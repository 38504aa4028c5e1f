"""Masked planar grids and the scalar/vector fields sampled on them.

Node ``(i, j)`` sits at ``x = origin[0] + j * spacing``,
``y = origin[1] + i * spacing``; arrays are indexed ``[i, j]`` (row, column)
and have shape ``(height, width)``.  Values outside the mask are NaN.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .geometry import Rect

__all__ = [
    "GridDomain",
    "ScalarField",
    "VectorField",
    "read_grid_csv",
    "parse_grid_csv",
    "write_grid_csv",
    "format_float",
]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class GridDomain:
    width: int
    height: int
    spacing: float = 1.0
    mask: np.ndarray | None = None
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (int(self.width) > 0 and int(self.height) > 0):
            raise InvalidInput("grid width and height must be positive")
        if not self.spacing > 0:
            raise InvalidInput("grid spacing must be positive")
        shape = (int(self.height), int(self.width))
        mask = np.ones(shape, bool) if self.mask is None else np.array(self.mask, dtype=bool)
        if mask.shape != shape:
            raise InvalidInput(f"mask shape {mask.shape} does not match grid {shape}")
        if not mask.any():
            raise InvalidInput("grid mask selects no nodes")
        mask.setflags(write=False)
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """``(x, y)`` coordinate arrays of every node."""
        i, j = np.indices(self.shape)
        return self.origin[0] + j * self.spacing, self.origin[1] + i * self.spacing

    def nodes_in(self, region) -> np.ndarray:
        """Masked nodes strictly inside an open region."""
        x, y = self.coords()
        if isinstance(region, Rect):
            inside = (region.x0 < x) & (x < region.x1) & (region.y0 < y) & (y < region.y1)
        else:
            inside = (x - region.cx) ** 2 + (y - region.cy) ** 2 < region.r**2
        return inside & self.mask

    def node_rect(self, i0: int, j0: int, i1: int, j1: int):
        """Open rectangle holding exactly the nodes ``i0..i1`` x ``j0..j1``."""
        h = self.spacing
        ox, oy = self.origin
        return Rect(ox + (j0 - 0.5) * h, oy + (i0 - 0.5) * h, ox + (j1 + 0.5) * h, oy + (i1 + 0.5) * h)

    def with_mask(self, mask) -> "GridDomain":
        return GridDomain(self.width, self.height, self.spacing, mask, self.origin)

    def header(self) -> dict:
        out = {"width": self.width, "height": self.height, "spacing": self.spacing}
        if self.origin != (0.0, 0.0):
            out["origin"] = list(self.origin)
        return out

    @classmethod
    def from_header(cls, obj, mask=None) -> "GridDomain":
        try:
            return cls(obj["width"], obj["height"], obj.get("spacing", 1.0), mask, obj.get("origin", (0.0, 0.0)))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"bad grid header: {exc}") from exc


def _check_on_mask(domain: GridDomain, arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    if arr.shape != domain.shape:
        raise InvalidInput(f"{name} has shape {arr.shape}, expected {domain.shape}")
    if not np.all(np.isfinite(arr[domain.mask])):
        raise InvalidInput(f"{name} is missing values on masked nodes")
    arr[~domain.mask] = np.nan
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_on_mask(self.domain, self.values, "scalar field"))

    def to_csv(self) -> str:
        return write_grid_csv(self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    domain: GridDomain
    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gx", _check_on_mask(self.domain, self.gx, "gx"))
        object.__setattr__(self, "gy", _check_on_mask(self.domain, self.gy, "gy"))

    @classmethod
    def from_function(cls, domain: GridDomain, fn) -> "VectorField":
        """Sample ``fn(x, y) -> (gx, gy)`` at every masked node."""
        x, y = domain.coords()
        gx, gy = fn(x, y)
        gx = np.where(domain.mask, np.broadcast_to(gx, domain.shape), np.nan)
        gy = np.where(domain.mask, np.broadcast_to(gy, domain.shape), np.nan)
        return cls(domain, gx, gy)


def write_grid_csv(values: np.ndarray, path=None) -> str:
    """One CSV row per grid row; NaN nodes become empty cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in values:
        writer.writerow(["" if math.isnan(v) else format_float(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_grid_csv(path) -> tuple[np.ndarray, np.ndarray]:
    return parse_grid_csv(Path(path).read_text())


def parse_grid_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse grid CSV text into ``(values, mask)``; empty cells are masked out."""
    rows = [r for r in csv.reader(io.StringIO(text))]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise InvalidInput("grid CSV rows must all have the same length")
    try:
        values = np.array(
            [[float(c) if c.strip() else np.nan for c in r] for r in rows], dtype=float
        )
    except ValueError as exc:
        raise InvalidInput(f"grid CSV has a non-numeric cell: {exc}") from exc
    return values, np.isfinite(values)


def read_header(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: {exc}") from exc
