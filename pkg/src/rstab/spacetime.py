"""Generalized Robertson-Walker models ``I x_phi F`` of constant curvature.

The ambient metric is ``-ds^2 + phi(s)^2 g_F``.  The closed conformal field
is ``V = phi(s) d/ds`` with conformal factor ``psi = phi'``.  Two fibers are
supported: the unit round sphere (``k = 1``) and the flat square torus of
side ``2 pi`` (``k = 0``).
"""

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError, UnsupportedModelError

__all__ = [
    "WarpingFunction",
    "GRWModel",
    "SliceData",
    "make_de_sitter",
    "make_static_cylinder",
    "make_model",
    "curvature_residuals",
    "slice_data",
    "DEFAULT_INTERVAL",
]

DEFAULT_INTERVAL = (-3.0, 3.0)


@dataclass(frozen=True)
class WarpingFunction:
    """Warping function with analytic first and second derivatives."""

    phi: Callable
    dphi: Callable
    ddphi: Callable

    def fd_check(self, samples, step=1e-3):
        """Largest relative mismatch between analytic and 4th-order FD derivatives.

        Guards against transcription errors in hand-written derivatives.
        """
        s = np.asarray(samples, dtype=float)
        h = step

        def d1(f):
            return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)

        e1 = np.abs(d1(self.phi) - self.dphi(s)) / np.maximum(1.0, np.abs(self.phi(s)))
        e2 = np.abs(d1(self.dphi) - self.ddphi(s)) / np.maximum(1.0, np.abs(self.phi(s)))
        return float(max(e1.max(), e2.max()))


@dataclass(frozen=True)
class GRWModel:
    """A GRW spacetime ``I x_phi F``.

    ``c`` is the ambient sectional curvature, or the string
    ``"nonconstant"`` when none is claimed.  ``realization`` names the flat
    ambient space used by the surface module; ``None`` means graphs in this
    model cannot be discretized.
    """

    name: str
    n: int
    fiber_kind: str
    warping: WarpingFunction
    c: Union[float, str]
    interval: tuple = DEFAULT_INTERVAL
    realization: str = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def k(self):
        return {"sphere": 1.0, "torus": 0.0}[self.fiber_kind]

    @property
    def has_constant_curvature(self):
        return not isinstance(self.c, str)

    def require_constant_curvature(self):
        if not self.has_constant_curvature:
            raise UnsupportedModelError(f"model {self.name!r} has no constant sectional curvature")
        return float(self.c)

    def phi(self, s):
        return self.warping.phi(s)

    def dphi(self, s):
        return self.warping.dphi(s)

    def ddphi(self, s):
        return self.warping.ddphi(s)

    def contains(self, s):
        lo, hi = self.interval
        s = np.asarray(s)
        return bool(np.all((s >= lo) & (s <= hi)))


@dataclass(frozen=True)
class SliceData:
    """Closed-form geometry of the slice ``{s0} x F``."""

    s0: float
    umbilicity: float
    H: np.ndarray
    eta: float
    psi: float
    Npsi: float
    area_factor: float


def make_de_sitter(n, interval=DEFAULT_INTERVAL):
    """De Sitter space as ``-R x_{cosh s} S^n``; ``c = 1``, equator at ``s = 0``."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"de Sitter model needs n >= 2, got {n!r}")
    w = WarpingFunction(np.cosh, np.sinh, np.cosh)
    return GRWModel("de_sitter", int(n), "sphere", w, 1.0, tuple(interval),
                    realization="minkowski_hyperquadric")


def _one(s):
    return np.ones_like(np.asarray(s, dtype=float))


def _zero(s):
    return np.zeros_like(np.asarray(s, dtype=float))


def make_static_cylinder(n, interval=DEFAULT_INTERVAL):
    """Flat static model ``-R x T^n`` with ``phi = 1``; every slice is totally geodesic."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"static cylinder needs n >= 1, got {n!r}")
    w = WarpingFunction(_one, _zero, _zero)
    return GRWModel("static_cylinder", int(n), "torus", w, 0.0, tuple(interval),
                    realization="minkowski_product")


def make_model(kind, n, interval=DEFAULT_INTERVAL):
    """Look up a model by its manifest key."""
    builders = {"de_sitter": make_de_sitter, "static_cylinder": make_static_cylinder}
    if kind not in builders:
        raise DomainError(f"unknown model {kind!r}; expected one of {sorted(builders)}")
    return builders[kind](n, interval)


def curvature_residuals(model, s):
    """``(phi''/phi - c, (phi'^2 + k)/phi^2 - c)`` at ``s``."""
    c = model.require_constant_curvature()
    s = np.asarray(s, dtype=float)
    p, dp, ddp = model.phi(s), model.dphi(s), model.ddphi(s)
    r1 = ddp / p - c
    r2 = (dp ** 2 + model.k) / p ** 2 - c
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


def slice_data(model, s0):
    """Umbilicity factor, mean curvatures and support data of a slice."""
    if not model.contains(s0):
        raise DomainError(f"s0={s0} outside the model interval {model.interval}")
    p = float(model.phi(s0))
    dp = float(model.dphi(s0))
    ddp = float(model.ddphi(s0))
    ratio = dp / p
    H = ratio ** np.arange(model.n + 1)
    # the slice normal is d/ds itself, so cosh(theta) = 1 and N(psi) = phi''
    return SliceData(float(s0), -ratio, H, -p, dp, ddp, p ** model.n)
