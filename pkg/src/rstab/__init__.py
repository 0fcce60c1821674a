"""Discrete higher-order mean curvatures and r-stability of spacelike graphs
in constant-curvature generalized Robertson-Walker spacetimes."""

from . import calculus, curvalg, families, grid, spacetime, stability, surface, variation
from .errors import (CapacityError, DiscretizationError, DomainError, ManifestError,
                     PreconditionError, RStabError, SpacelikeError, UnsupportedModelError)
from .grid import build_fiber_grid
from .spacetime import make_de_sitter, make_model, make_static_cylinder
from .surface import embed_graph

__version__ = "0.1.0"

__all__ = [
    "calculus", "curvalg", "families", "grid", "spacetime", "stability", "surface", "variation",
    "build_fiber_grid", "embed_graph", "make_de_sitter", "make_model", "make_static_cylinder",
    "RStabError", "DomainError", "CapacityError", "UnsupportedModelError", "SpacelikeError",
    "DiscretizationError", "PreconditionError", "ManifestError",
]
