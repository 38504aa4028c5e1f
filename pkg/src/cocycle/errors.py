"""Exception hierarchy.

``InvalidInput`` covers malformed or inconsistent input data (the CLI maps it
to exit status 2).  ``DomainFailure`` covers well-formed input for which the
requested object does not exist (exit status 1).
"""


class CocycleError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(CocycleError, ValueError):
    pass


class DomainFailure(CocycleError):
    pass


# -- covers -----------------------------------------------------------------

class DuplicateIdentifier(InvalidInput):
    def __init__(self, ident):
        self.ident = ident
        super().__init__(f"duplicate cover set identifier {ident!r}")


class UnknownIdentifierInPair(InvalidInput):
    def __init__(self, ident, where):
        self.ident = ident
        self.where = tuple(where)
        super().__init__(f"unknown identifier {ident!r} in {list(self.where)}")


class MalformedCover(InvalidInput):
    pass


# -- couplings and primitives -------------------------------------------------

class MissingPairValue(InvalidInput, KeyError):
    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"coupling has no value for ordered pair {list(self.pair)}")

    def __str__(self):
        return self.args[0]


class MissingPrimitiveValue(InvalidInput, KeyError):
    def __init__(self, ident):
        self.ident = ident
        super().__init__(f"primitive has no value for set {ident!r}")

    def __str__(self):
        return self.args[0]


class UnknownBaseIdentifier(InvalidInput):
    def __init__(self, ident):
        self.ident = ident
        super().__init__(f"base {ident!r} is not a cover set")


class AntisymmetryViolation(DomainFailure):
    def __init__(self, pair, magnitude):
        self.pair = tuple(pair)
        self.magnitude = magnitude
        super().__init__(
            f"|d(U,V) + d(V,U)| = {magnitude:.3g} on pair {list(self.pair)}"
        )


class IncompatibleCoupling(DomainFailure):
    """Raised by pipelines when a derived coupling fails validation."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"coupling violates compatibility (max residual {report.max_residual:.3g})"
        )


class Obstructed(DomainFailure):
    """No primitive exists; ``report`` holds the nonvanishing holonomies."""

    def __init__(self, report):
        self.report = report
        worst = max(report.entries, key=lambda e: abs(e.holonomy), default=None)
        where = f" on cycle {list(worst.nodes)}" if worst is not None else ""
        super().__init__(
            f"coupling is obstructed: max |holonomy| = {report.max_abs_holonomy:.6g}{where}"
        )


# -- path chains ----------------------------------------------------------------

class PathNotCovered(DomainFailure):
    def __init__(self, t, point):
        self.t = t
        self.point = tuple(point)
        super().__init__(f"path point {self.point} at t={t:.17g} lies in no chart")


class NoProgress(DomainFailure):
    def __init__(self, t):
        self.t = t
        super().__init__(f"chain construction cannot advance past t={t:.17g}")


class NonAdjacentConsecutiveCharts(InvalidInput):
    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"consecutive charts {list(self.pair)} do not intersect")


class InvalidChain(InvalidInput):
    pass


# -- gluing pipelines ------------------------------------------------------------

class NotConstantOnOverlap(DomainFailure):
    def __init__(self, pair, deviation):
        self.pair = tuple(pair)
        self.deviation = deviation
        super().__init__(
            f"f_V - f_U is not constant on overlap {list(self.pair)} "
            f"(std {deviation:.3g})"
        )


class EmptyOverlapSamples(InvalidInput):
    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"overlap {list(self.pair)} has no shared sample nodes")


class InconsistentGlue(DomainFailure):
    def __init__(self, pair, deviation):
        self.pair = tuple(pair)
        self.deviation = deviation
        super().__init__(
            f"glued values disagree by {deviation:.3g} on overlap {list(self.pair)}"
        )


class CurlNotZero(DomainFailure):
    def __init__(self, chart, plaquette, magnitude):
        self.chart = chart
        self.plaquette = tuple(int(v) for v in plaquette)
        self.magnitude = magnitude
        super().__init__(
            f"discrete curl {magnitude:.3g} at plaquette (row, col)={self.plaquette} "
            f"in chart {chart!r}"
        )


class DisconnectedRectangle(DomainFailure):
    def __init__(self, chart):
        self.chart = chart
        super().__init__(f"masked nodes of chart {chart!r} are not 4-connected")
