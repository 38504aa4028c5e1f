"""Command line front end.

Exit status: 0 on success, 1 when the input is fine but the requested object
does not exist (obstruction, compatibility violation, uncovered path, ...),
2 on unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import _jsonio
from .chain import build_chain, chain_sum, endpoint_charts
from .coupling import DEFAULT_TOL, Coupling, validate_compatibility
from .errors import CocycleError, DomainFailure, InvalidInput, Obstructed
from .geometry import GeomCover, Polyline, Rect
from .gluing import DEFAULT_TILE, LocalFunctionFamily, Patch, glue_functions, poincare_reconstruct
from .grid import GridDomain, VectorField, read_grid_csv, write_grid_csv
from .nerve import Cover
from .solver import holonomy, solve_primitive

log = logging.getLogger("cocycle")

OK, DOMAIN, OPERATIONAL = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help=f"tolerance (default {DEFAULT_TOL:g})")
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    common.add_argument("--out", type=Path, help="write the result artifact here")
    common.add_argument("--strict", action="store_true", help="require both coupling orientations")
    common.add_argument("--base", help="base cover set (zero of the primitive)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cocycle", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in (
        ("validate", "check antisymmetry and triple additivity of a coupling"),
        ("solve", "compute a primitive or report the holonomy obstruction"),
        ("holonomy", "holonomy of a coupling on a fundamental cycle basis"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("cover", type=Path)
        sp.add_argument("coupling", type=Path)

    sp = sub.add_parser("chain", parents=[common], help="chart chain and chain sum along a polyline")
    sp.add_argument("geomcover", type=Path)
    sp.add_argument("polyline", type=Path)
    sp.add_argument("coupling", type=Path)
    sp.add_argument("--start", help="start chart (default: smallest chart at the first vertex)")
    sp.add_argument("--end", help="end chart (default: smallest chart at the last vertex)")

    sp = sub.add_parser("glue", parents=[common], help="glue patch functions equal up to constants")
    sp.add_argument("manifest", type=Path)

    sp = sub.add_parser("poincare", parents=[common], help="potential of a curl-free grid field")
    sp.add_argument("header", type=Path)
    sp.add_argument("gx", type=Path)
    sp.add_argument("gy", type=Path)
    sp.add_argument("--tile", type=int, default=DEFAULT_TILE, help="tile half-size k")
    return p


def _tol(args, default=DEFAULT_TOL):
    tol = default if args.tol is None else args.tol
    if not tol > 0:
        raise InvalidInput(f"--tol must be positive, got {tol}")
    return tol


def _load_coupling(args, path):
    d = Coupling.from_json(_jsonio.load(path), strict=args.strict)
    return d, _tol(args, d.tolerance)


def _field_result(F):
    return {"nodes": int(F.domain.mask.sum())}, write_grid_csv(F.values)


def _run(args):
    """Return ``(status, result, artifact_text)``."""
    cmd = args.command
    if cmd in ("validate", "solve", "holonomy"):
        cover = Cover.from_json(_jsonio.load(args.cover))
        d, tol = _load_coupling(args, args.coupling)
        if cmd == "validate":
            report = validate_compatibility(cover, d, tol)
            return (OK if report.clean else DOMAIN), report.to_json(), None
        if cmd == "holonomy":
            return OK, holonomy(cover, d, tol).to_json(), None
        try:
            C = solve_primitive(cover, d, base=args.base, tol=tol)
        except Obstructed as exc:
            return DOMAIN, exc.report.to_json(), None
        return OK, C.to_json(), None

    if cmd == "chain":
        gcover = GeomCover.from_json(_jsonio.load(args.geomcover))
        path = Polyline.from_json(_jsonio.load(args.polyline))
        d, _ = _load_coupling(args, args.coupling)
        start, end = endpoint_charts(gcover, path)
        start = args.start or start
        end = args.end or end
        for ident in (start, end):
            if ident not in gcover.charts:
                raise InvalidInput(f"unknown chart {ident!r}")
        chain = build_chain(gcover, path)
        result = chain.to_json()
        result.update(start=start, end=end, chain_sum=chain_sum(d, chain, start, end))
        return OK, result, None

    if cmd == "glue":
        family = _load_family(args.manifest)
        try:
            F = glue_functions(family, _tol(args), base=args.base)
        except Obstructed as exc:
            return DOMAIN, exc.report.to_json(), None
        result, text = _field_result(F)
        return OK, result, text

    if cmd == "poincare":
        header = _jsonio.load(args.header)
        gx, mx = read_grid_csv(args.gx)
        gy, my = read_grid_csv(args.gy)
        if gx.shape != gy.shape or not np.array_equal(mx, my):
            raise InvalidInput("gx and gy must have the same shape and masked cells")
        domain = GridDomain.from_header(header, mx)
        g = VectorField(domain, gx, gy)
        try:
            F = poincare_reconstruct(domain, g, tol=_tol(args), tile=args.tile, base=args.base)
        except Obstructed as exc:
            return DOMAIN, exc.report.to_json(), None
        result, text = _field_result(F)
        return OK, result, text
    raise InvalidInput(f"unknown command {cmd!r}")


def _load_family(manifest: Path) -> LocalFunctionFamily:
    """Patch manifest: grid header keys plus ``{"patches": {id: {"csv": path, "rect": [...]}}}``.

    CSV paths are relative to the manifest.  The grid mask is the union of
    the patches' non-empty cells.
    """
    obj = _jsonio.load(manifest)
    try:
        specs = obj["patches"]
    except (KeyError, TypeError):
        raise InvalidInput("glue manifest needs a 'patches' object") from None
    if not specs:
        raise InvalidInput("glue manifest has no patches")
    arrays = {}
    for ident, spec in specs.items():
        vals, nodes = read_grid_csv(manifest.parent / spec["csv"])
        region = Rect(*spec["rect"]) if "rect" in spec else None
        arrays[ident] = (region, nodes, vals)
    union = np.zeros(next(iter(arrays.values()))[1].shape, bool)
    for _, nodes, _ in arrays.values():
        if nodes.shape != union.shape:
            raise InvalidInput("patch CSVs differ in shape")
        union |= nodes
    domain = GridDomain.from_header(obj, union)
    return LocalFunctionFamily(domain, {k: Patch(*v) for k, v in arrays.items()})


def _error_payload(exc: BaseException) -> dict:
    details = {}
    for key, val in vars(exc).items():
        if key == "report" and hasattr(val, "to_json"):
            details[key] = val.to_json()
        elif isinstance(val, (str, int, float, tuple, list)) or val is None:
            details[key] = list(val) if isinstance(val, tuple) else val
    return {"type": type(exc).__name__, "message": str(exc), **details}


def _emit(args, status, result, text, error=None):
    artifact = text if text is not None else (None if result is None else _jsonio.dumps(result) + "\n")
    if args.out is not None and artifact is not None:
        args.out.write_text(artifact)
    if args.json:
        env = {"command": args.command, "status": status}
        if error is not None:
            env["error"] = error
        if result is not None:
            env["result"] = result
        if args.out is not None and artifact is not None:
            env["out"] = str(args.out)
        elif text is not None:
            env["csv"] = text
        sys.stdout.write(_jsonio.dumps(env) + "\n")
    elif artifact is not None and args.out is None:
        sys.stdout.write(artifact)
    if error is not None:
        print(f"cocycle {args.command}: {error['message']}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        status, result, text = _run(args)
    except (InvalidInput, OSError, KeyError, TypeError, ValueError) as exc:
        _emit(args, OPERATIONAL, None, None, _error_payload(exc))
        return OPERATIONAL
    except (DomainFailure, CocycleError) as exc:
        _emit(args, DOMAIN, None, None, _error_payload(exc))
        return DOMAIN
    _emit(args, status, result, text)
    return status


if __name__ == "__main__":
    sys.exit(main())
