"""Couplings on a cover's intersecting pairs and their compatibility checks.

A coupling assigns a real number ``d[U, V]`` to every ordered intersecting
pair.  It is compatible when it is antisymmetric and additive on every
declared triple overlap; compatibility is necessary for a primitive
``C`` with ``d[U, V] == C[V] - C[U]`` to exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import InvalidInput, MissingPairValue, MissingPrimitiveValue, UnknownIdentifierInPair
from .nerve import Cover

__all__ = [
    "DEFAULT_TOL",
    "Coupling",
    "ViolationReport",
    "validate_compatibility",
    "induced_coupling",
    "primitive_residual",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Coupling:
    """Scalar values on ordered pairs; both orientations are stored."""

    values: Mapping[tuple[str, str], float]
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.tolerance >= 0:
            raise InvalidInput(f"tolerance must be non-negative, got {self.tolerance!r}")
        vals = {(str(u), str(v)): float(x) for (u, v), x in self.values.items()}
        object.__setattr__(self, "values", MappingProxyType(vals))

    def __getitem__(self, pair: tuple[str, str]) -> float:
        u, v = pair
        if u == v:
            return 0.0
        try:
            return self.values[pair]
        except KeyError:
            raise MissingPairValue(pair) from None

    def __contains__(self, pair) -> bool:
        return pair[0] == pair[1] or pair in self.values

    @classmethod
    def from_oriented(
        cls,
        triples: Iterable[tuple[str, str, float]],
        tolerance: float = DEFAULT_TOL,
        strict: bool = False,
    ) -> "Coupling":
        """Build from ``(U, V, d)`` rows, completing ``d[V, U] = -d`` when absent.

        With ``strict`` every pair must be given in both orientations.
        """
        vals: dict[tuple[str, str], float] = {}
        for row in triples:
            try:
                u, v, x = row
            except (TypeError, ValueError):
                raise InvalidInput(f"coupling rows must be [U, V, d], got {row!r}") from None
            if u == v:
                raise InvalidInput(f"coupling row {row!r} pairs a set with itself")
            if (u, v) in vals:
                raise InvalidInput(f"duplicate coupling value for {[u, v]}")
            try:
                vals[(u, v)] = float(x)
            except (TypeError, ValueError):
                raise InvalidInput(f"coupling value {x!r} is not a number") from None
        for (u, v), x in list(vals.items()):
            if (v, u) not in vals:
                if strict:
                    raise MissingPairValue((v, u))
                vals[(v, u)] = -x
        return cls(vals, tolerance)

    @classmethod
    def from_json(cls, obj: Mapping, strict: bool = False) -> "Coupling":
        try:
            rows = obj["values"]
        except (KeyError, TypeError):
            raise InvalidInput("coupling document needs a 'values' list") from None
        return cls.from_oriented(rows, obj.get("tolerance", DEFAULT_TOL), strict=strict)

    def to_json(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "values": [[u, v, x] for (u, v), x in sorted(self.values.items())],
        }


@dataclass(frozen=True)
class ViolationReport:
    antisymmetry_violations: list = field(default_factory=list)
    additivity_violations: list = field(default_factory=list)
    max_residual: float = 0.0
    tolerance: float = DEFAULT_TOL

    @property
    def clean(self) -> bool:
        return not self.antisymmetry_violations and not self.additivity_violations

    def to_json(self) -> dict:
        return {
            "clean": self.clean,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "antisymmetry": [
                {"pair": list(p), "magnitude": m} for p, m in self.antisymmetry_violations
            ],
            "additivity": [
                {"triple": list(t), "magnitude": m} for t, m in self.additivity_violations
            ],
        }


def require_known_ids(cover: Cover, d: Coupling):
    """Raise if ``d`` has a value on a pair naming a set outside ``cover``."""
    known = set(cover.sets)
    for pair in sorted(d.values):
        for ident in pair:
            if ident not in known:
                raise UnknownIdentifierInPair(ident, pair)


def _require_values(cover: Cover, d: Coupling):
    require_known_ids(cover, d)
    for u, v in sorted(cover.pairs):
        if (u, v) not in d.values:
            raise MissingPairValue((u, v))
        if (v, u) not in d.values:
            raise MissingPairValue((v, u))


def validate_compatibility(
    cover: Cover, d: Coupling, tol: float | None = None
) -> ViolationReport:
    """Check antisymmetry on every pair and additivity on every declared triple.

    An antisymmetry violation is listed under both orientations.  A triple is
    listed once, with the largest residual over its three rotations.
    """
    tol = d.tolerance if tol is None else tol
    _require_values(cover, d)
    vals = d.values
    worst = 0.0
    anti = []
    for u, v in sorted(cover.pairs):
        r = abs(vals[u, v] + vals[v, u])
        worst = max(worst, r)
        if r > tol:
            anti.append(((u, v), r))
            anti.append(((v, u), r))
    anti.sort()
    add = []
    for t in sorted(cover.triples):
        a, b, c = t
        r = max(
            abs(vals[a, b] + vals[b, c] - vals[a, c]),
            abs(vals[b, c] + vals[c, a] - vals[b, a]),
            abs(vals[c, a] + vals[a, b] - vals[c, b]),
        )
        worst = max(worst, r)
        if r > tol:
            add.append((t, r))
    return ViolationReport(anti, add, worst, tol)


def _primitive_values(C) -> Mapping[str, float]:
    return C.values if hasattr(C, "values") and not isinstance(C, Mapping) else C


def induced_coupling(cover: Cover, C, tolerance: float = DEFAULT_TOL) -> Coupling:
    """The coupling ``d[U, V] = C[V] - C[U]`` on every ordered pair of ``cover``."""
    vals = _primitive_values(C)
    for s in cover.sets:
        if s not in vals:
            raise MissingPrimitiveValue(s)
    out = {}
    for u, v in cover.pairs:
        cu, cv = float(vals[u]), float(vals[v])
        out[u, v] = cv - cu
        out[v, u] = cu - cv
    return Coupling(out, tolerance)


def primitive_residual(cover: Cover, d: Coupling, C) -> float:
    """``max |d[U, V] - (C[V] - C[U])|`` over ordered pairs (0 when there are none)."""
    vals = _primitive_values(C)
    _require_values(cover, d)
    for s in cover.sets:
        if s not in vals:
            raise MissingPrimitiveValue(s)
    worst = 0.0
    for u, v in cover.pairs:
        cu, cv = vals[u], vals[v]
        worst = max(worst, abs(d.values[u, v] - (cv - cu)), abs(d.values[v, u] - (cu - cv)))
    return worst
