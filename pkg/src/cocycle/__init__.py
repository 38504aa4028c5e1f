"""Primitives of couplings on finite covers, holonomy obstructions, and
local-to-global gluing of sampled scalar data."""

from .chain import Chain, build_chain, chain_sum, endpoint_charts, homotopy_sweep
from .coupling import (
    DEFAULT_TOL,
    Coupling,
    ViolationReport,
    induced_coupling,
    primitive_residual,
    validate_compatibility,
)
from .errors import CocycleError, DomainFailure, InvalidInput, Obstructed
from .geometry import Disk, GeomCover, Polyline, Rect
from .gluing import (
    Chart,
    LocalFunctionFamily,
    Patch,
    consistent_gradient,
    discrete_curl,
    extract_coupling,
    glue_functions,
    gradient_mismatch,
    local_potentials,
    poincare_reconstruct,
    tile_charts,
)
from .grid import GridDomain, ScalarField, VectorField
from .nerve import Cover, CycleBasis, NerveGraph, build_nerve, cycle_basis, spanning_forest
from .solver import (
    HolonomyReport,
    Primitive,
    component_primitives,
    holonomy,
    solve_primitive,
)

__version__ = "0.1.0"
