"""Shared builders for the test suite, cached so refinement studies stay cheap."""

from functools import lru_cache

import numpy as np

from rstab.families import graph_values
from rstab.grid import sphere_grid, torus_grid
from rstab.harness import fit_slope
from rstab.spacetime import make_de_sitter, make_static_cylinder
from rstab.surface import embed_graph

LN2 = float(np.log(2.0))
SPHERE_LEVELS = ((16, 32), (32, 64), (64, 128))
TORUS_LEVELS = ((16, 16), (32, 32), (64, 64))

DS = make_de_sitter(2)
CYL = make_static_cylinder(2)


@lru_cache(maxsize=None)
def grid(kind, res):
    return sphere_grid(*res) if kind == "sphere" else torus_grid(*res)


def model_of(kind):
    return DS if kind == "sphere" else CYL


def levels(kind):
    return SPHERE_LEVELS if kind == "sphere" else TORUS_LEVELS


@lru_cache(maxsize=None)
def geometry(kind, res, expr):
    g = grid(kind, res)
    return embed_graph(model_of(kind), g, graph_values(g, expr))


def slope(h, err):
    return fit_slope(h, err)
