"""Vertical variations of graphs and finite-difference checks of the variation formulas.

A variation moves every node along ``d/ds``: ``u_t = u + t w``.  It stays a
graph for small ``t`` and its normal speed is ``f(t) = w cosh(theta_t)``;
the remainder ``w d/ds - f N`` is tangential, so the evolution law for
``S_{r+1}`` is exercised with a nonzero tangential term whenever the base
is not a slice.  ``f0`` is prescribed and ``w = f0 / cosh(theta_0)``.

Time derivatives use the stencil ``t in {-2, -1, 0, 1, 2} * h_t``: the
4-point central first derivative and the 5-point second derivative, both
fourth order in ``h_t``.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import simpson

from .calculus import gradient_frame, lr_trace_form
from .errors import DomainError, PreconditionError
from .surface import embed_graph, integrate, lorentz

__all__ = [
    "VariationSpec",
    "FunctionalSeries",
    "FirstVariationReport",
    "SecondVariationReport",
    "make_variation",
    "cr_constant",
    "F_values",
    "r_area",
    "evolve",
    "balance_of_volume",
    "first_variation_check",
    "jacobi_series",
    "second_variation_check",
    "DEFAULT_HT",
]

DEFAULT_HT = 1e-2
_STEPS = (-2, -1, 0, 1, 2)
_VOLUME_PANELS = 16


@dataclass(frozen=True, eq=False)
class VariationSpec:
    """Vertical variation ``u_t = u + t w`` with initial normal speed ``f0``."""

    model: object
    grid: object
    u: np.ndarray
    w: np.ndarray
    f0: np.ndarray
    h_t: float
    _geoms: dict = field(default_factory=dict, repr=False)

    @property
    def t_grid(self):
        return tuple(k * self.h_t for k in _STEPS if k)

    @property
    def base(self):
        return self._geometry(0)

    def _geometry(self, k):
        """Geometry at stencil step ``k`` (``t = k h_t``), cached."""
        if k not in self._geoms:
            self._geoms[k] = embed_graph(self.model, self.grid, self.u + k * self.h_t * self.w)
        return self._geoms[k]


@dataclass(frozen=True)
class FunctionalSeries:
    """``A_r``, ``V`` and ``J_r = A_r - lam V`` sampled on the stencil."""

    r: int
    t: np.ndarray
    area_r: np.ndarray
    volume: np.ndarray
    jacobi: np.ndarray
    lam: float
    c_r: float
    H_bar: float
    dJ: float
    d2J: float


@dataclass(frozen=True)
class FirstVariationReport:
    """FD versus formula for ``A_r'(0)`` and the pointwise evolution law of ``S_{r+1}``."""

    r: int
    fd: float
    formula: float
    error: float
    dS_fd: np.ndarray
    dS_formula: np.ndarray
    tangential: np.ndarray
    pointwise_max: float
    h: float
    h_t: float


@dataclass(frozen=True)
class SecondVariationReport:
    """``J_r''(0)`` by finite differences, by the operator form and by the bilinear form."""

    r: int
    fd: float
    operator_form: float
    bilinear_form: float
    error: float
    h: float
    h_t: float


def _check_r(n, r):
    if not isinstance(r, (int, np.integer)) or r < 0 or r > n - 1:
        raise DomainError(f"r must be in [0, {n - 1}], got {r!r}")


def make_variation(model, grid, u, f0, h_t=DEFAULT_HT):
    """Build a variation with normal speed ``f0`` at ``t = 0``.

    Every stencil surface is embedded eagerly, so a variation that leaves
    the spacelike cone fails here with :class:`~rstab.errors.SpacelikeError`.
    """
    if not h_t > 0:
        raise DomainError(f"h_t must be positive, got {h_t}")
    u = np.asarray(u, dtype=float).reshape(-1)
    f0 = np.broadcast_to(np.asarray(f0, dtype=float), u.shape).copy()
    base = embed_graph(model, grid, u)
    w = f0 / base.cosh_theta
    spec = VariationSpec(model, grid, u, w, f0, float(h_t), {0: base})
    for k in _STEPS:
        spec._geometry(k)
    return spec


def cr_constant(n, r, c):
    """``c_r``: zero for even ``r``; ``c_1 = n c``, ``c_r = -c (n-r+1)/(r-1) c_{r-2}``."""
    _check_r(n, r)
    if r % 2 == 0:
        return 0.0
    val = n * float(c)
    for k in range(3, r + 1, 2):
        val = -float(c) * (n - k + 1) / (k - 1) * val
    return val


def F_values(geom, r):
    """Node values of ``F_r(S_1, .., S_r)``."""
    n = geom.n
    _check_r(n, r)
    c = geom.c
    S = geom.pack.S
    F = [np.ones(geom.size), -S[:, 1]]
    for k in range(2, r + 1):
        F.append((-1) ** k * S[:, k] - c * (n - k + 1) / (k - 1) * F[k - 2])
    return F[r]


def r_area(geom, r):
    """``A_r = int F_r dM``."""
    return integrate(geom, F_values(geom, r))


def evolve(spec, t):
    """Geometry of ``u + t w`` and the normal speed ``f(t) = w cosh(theta_t)``."""
    k = t / spec.h_t
    if abs(k - round(k)) < 1e-12 and round(k) in _STEPS:
        geom = spec._geometry(int(round(k)))
    else:
        geom = embed_graph(spec.model, spec.grid, spec.u + t * spec.w)
    return geom, spec.w * geom.cosh_theta


def balance_of_volume(spec, t, panels=_VOLUME_PANELS):
    """Signed ambient volume swept between ``u`` and ``u + t w``.

    The GRW volume element is ``phi(s)^n ds dV_F``, so
    ``V(t) = sum_q dV_F(q) int_0^t w phi(u + tau w)^n dtau``, the inner
    integral by composite Simpson with ``panels`` intervals.
    """
    if t == 0:
        return 0.0
    n = spec.grid.dim
    tau = np.linspace(0.0, t, panels + 1)
    phi = spec.model.phi(spec.u[None, :] + tau[:, None] * spec.w[None, :])
    inner = simpson(spec.w[None, :] * phi ** n, x=tau, axis=0)
    return float(np.sum(inner * spec.grid.weights))


def _d1(values, h):
    vm2, vm1, _, v1, v2 = values
    return (-v2 + 8 * v1 - 8 * vm1 + vm2) / (12 * h)


def _d2(values, h):
    vm2, vm1, v0, v1, v2 = values
    return (-v2 + 16 * v1 - 30 * v0 + 16 * vm1 - vm2) / (12 * h * h)


def _tangential_part(spec, geom, f):
    """Frame components of ``(dX/dt)^T = w d/ds - f N``."""
    Tvec = spec.w[:, None] * geom.time_vec - f[:, None] * geom.normal
    return lorentz(Tvec[:, None, :], geom.frame_vecs)


def first_variation_check(spec, r):
    """Compare ``A_r'(0)`` and ``dS_{r+1}/dt`` with their closed forms.

    ``A_r'(0) = int [(-1)^{r+1} (r+1) S_{r+1} + c_r] f0 dM`` and, node by node,
    ``dS_{r+1}/dt = (-1)^{r+1} [L_r f + c tr(P_r) f - tr(A^2 P_r) f]
    + <(dX/dt)^T, grad S_{r+1}>``.
    """
    geom = spec.base
    n = geom.n
    _check_r(n, r)
    c = geom.c
    h_t = spec.h_t
    geoms = [spec._geometry(k) for k in _STEPS]
    fd = _d1([r_area(g, r) for g in geoms], h_t)
    p = geom.pack
    c_r = cr_constant(n, r, c)
    f0 = spec.f0
    formula = integrate(geom, ((-1) ** (r + 1) * (r + 1) * p.S[:, r + 1] + c_r) * f0)

    dS_fd = _d1([g.pack.S[:, r + 1] for g in geoms], h_t)
    Lf = lr_trace_form(geom, r, f0)
    tang = np.einsum("ka,ka->k", _tangential_part(spec, geom, f0),
                     gradient_frame(geom, p.S[:, r + 1]))
    dS_formula = (-1) ** (r + 1) * (Lf + c * p.trP[:, r] * f0 - p.trA2P[:, r] * f0) + tang
    return FirstVariationReport(r, fd, formula, abs(fd - formula), dS_fd, dS_formula, tang,
                                float(np.max(np.abs(dS_fd - dS_formula))), geom.h, h_t)


def jacobi_series(spec, r):
    """``A_r``, ``V`` and ``J_r`` on the stencil with ``lam = c_r + b_r mean(H_{r+1})``."""
    geom = spec.base
    n = geom.n
    _check_r(n, r)
    c_r = cr_constant(n, r, geom.c)
    b_r = (n - r) * comb(n, r)
    H_bar = integrate(geom, geom.pack.H[:, r + 1]) / r_area(geom, 0)
    lam = c_r + b_r * H_bar
    t = np.array([k * spec.h_t for k in _STEPS])
    A = np.array([r_area(spec._geometry(k), r) for k in _STEPS])
    V = np.array([balance_of_volume(spec, tk) for tk in t])
    J = A - lam * V
    return FunctionalSeries(r, t, A, V, J, lam, c_r, H_bar,
                            _d1(J, spec.h_t), _d2(J, spec.h_t))


def second_variation_check(spec, r, tol_factor=10.0):
    """Compare ``J_r''(0)`` with ``(r+1) int [L_r f + c tr(P_r) f - tr(A^2 P_r) f] f dM``.

    Raises
    ------
    PreconditionError
        If ``H_{r+1}`` of the base deviates from its mean by ``tol_factor h^2``
        or more at some node.
    """
    from .stability import stability_form

    geom = spec.base
    _check_r(geom.n, r)
    H = geom.pack.H[:, r + 1]
    dev = float(np.max(np.abs(H - integrate(geom, H) / geom.area)))
    if dev >= tol_factor * geom.h ** 2:
        raise PreconditionError(
            f"base H_{r + 1} is not constant: max deviation {dev:.3e} >= {tol_factor} h^2")
    series = jacobi_series(spec, r)
    f = spec.f0
    c = geom.c
    p = geom.pack
    op = (r + 1) * integrate(geom, (lr_trace_form(geom, r, f) + c * p.trP[:, r] * f
                                    - p.trA2P[:, r] * f) * f)
    bil = stability_form(geom, r, f)
    return SecondVariationReport(r, series.d2J, op, bil, abs(series.d2J - bil), geom.h, spec.h_t)
