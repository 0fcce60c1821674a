"""Discrete spacelike graphs ``s = u(q)`` over the fiber.

Both supported models sit inside a flat Lorentz space, which is where all
vector fields live:

* de Sitter: the hyperquadric ``<p, p> = 1`` of Minkowski ``L^{n+2}``, with
  ``p = (cosh u * q, sinh u)``;
* static cylinder: the product ``R^{1,2}`` itself, ``p = (x, y, u)``.

Ambient vectors are stored with the timelike component last.  In both cases
``d/ds = (phi'(u) q, phi(u))`` and the coordinate tangent of the fiber along
a Cartesian fiber vector ``v`` is ``(phi(u) v, 0)``.

The shape operator is ``A X = -(D_X N)^T``.  Its matrix is assembled from
products of first derivatives, ``h_ij = -<d_i N, X_j>``, with ``X_j`` the
coordinate tangents and ``N`` built from the analytic fiber geometry and
the differenced ``du``.  Parameter derivatives come from
:meth:`FiberGrid.gradient_params`, whose errors are smooth fields on the
whole fiber, so the pole rows are as accurate as the rest.
"""

import math
from dataclasses import dataclass

import numpy as np

from .curvalg import newton_matrices, pack_from_eigenvalues
from .errors import DiscretizationError, DomainError, SpacelikeError, UnsupportedModelError

__all__ = [
    "SurfaceGeometry",
    "CurvatureFields",
    "lorentz",
    "embed_graph",
    "spacelike_margin",
    "pointwise_curvatures",
    "integrate",
    "SPACELIKE_MARGIN",
]

SPACELIKE_MARGIN = 1e-6


def lorentz(a, b):
    """Lorentz inner product over the last axis (last component timelike)."""
    return np.sum(a[..., :-1] * b[..., :-1], axis=-1) - a[..., -1] * b[..., -1]


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """Per-node geometric state of a spacelike graph.

    Shapes use ``N`` nodes, ``n = 2`` parameters and ``m`` ambient
    components.  ``frame`` holds the coordinate coefficients of the
    orthonormal frame (``e_a = sum_i frame[:, i, a] X_i``) and
    ``frame_vecs`` the same vectors in ambient components.  ``shape`` is the
    shape operator in that frame, ``newton`` the matrices ``P_0..P_n`` in the
    same frame.
    """

    model: object
    grid: object
    u: np.ndarray
    du: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    cosh_theta: np.ndarray
    eta: np.ndarray
    time_vec: np.ndarray
    position: np.ndarray
    tangents: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    frame: np.ndarray
    frame_vecs: np.ndarray
    shape: np.ndarray
    eigenvalues: np.ndarray
    pack: object
    newton: np.ndarray
    dM: np.ndarray

    @property
    def n(self):
        return self.grid.dim

    @property
    def size(self):
        return self.grid.size

    @property
    def h(self):
        return self.grid.h

    @property
    def area(self):
        return integrate(self, np.ones(self.size))

    @property
    def c(self):
        return self.model.require_constant_curvature()

    def frame_derivative(self, values):
        """Derivative of a node field along each frame vector, shape ``(N, n) + trailing``."""
        d = self.grid.gradient_params(values)
        return np.einsum("kia,ki...->ka...", self.frame, d)

    def to_ambient(self, frame_components):
        """Ambient vector ``sum_a v_a e_a`` from frame components ``(N, n)``."""
        return np.einsum("ka,kam->km", frame_components, self.frame_vecs)

    def newton_coordinate(self, r):
        """``P_r`` as a (1,1)-tensor in parameter coordinates."""
        E = self.frame
        Einv = np.swapaxes(E, 1, 2) @ self.metric
        return E @ self.newton[:, r] @ Einv


@dataclass(frozen=True)
class CurvatureFields:
    """Node fields of curvature scalars; last axis indexed by ``r``."""

    S: np.ndarray
    H: np.ndarray
    trP: np.ndarray
    trAP: np.ndarray
    trA2P: np.ndarray
    b: np.ndarray
    margin: np.ndarray


def _require_realization(model, grid):
    if model.realization not in ("minkowski_hyperquadric", "minkowski_product"):
        raise UnsupportedModelError(f"model {model.name!r} has no flat ambient realization")
    if model.fiber_kind != grid.kind:
        raise DomainError(f"grid kind {grid.kind!r} does not match fiber {model.fiber_kind!r}")
    if model.n != grid.dim:
        raise DomainError(f"model dimension {model.n} does not match grid dimension {grid.dim}")


def _fiber_gradient(grid, du):
    """Fiber gradient of ``u`` as a Cartesian fiber vector, and its squared norm."""
    ginv = grid.metric_inv
    up = np.einsum("kij,kj->ki", ginv, du)
    G = np.einsum("ki,kim->km", up, grid.dpoint)
    return G, np.einsum("ki,ki->k", du, up)


def spacelike_margin(model, grid, u):
    """Node-wise ``phi(u) - |grad u|``; the graph is spacelike where this is positive."""
    u = np.asarray(u, dtype=float)
    du = grid.gradient_params(u)
    _, g2 = _fiber_gradient(grid, du)
    return model.phi(u) - np.sqrt(g2)


def embed_graph(model, grid, u):
    """Assemble the geometry of the graph ``s = u`` over ``grid``.

    Raises
    ------
    SpacelikeError
        If ``|grad u| >= phi(u) - 1e-6`` anywhere; the offending nodes are
        attached to the exception.
    DiscretizationError
        If the stencils produce non-finite values.
    """
    _require_realization(model, grid)
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != grid.size:
        raise DomainError(f"graph has {u.size} values for {grid.size} nodes")
    if not model.contains(u):
        raise DomainError(f"graph leaves the model interval {model.interval}")
    du = grid.gradient_params(u)
    G, g2 = _fiber_gradient(grid, du)
    phi, dphi, ddphi = model.phi(u), model.dphi(u), model.ddphi(u)
    bad = np.flatnonzero(np.sqrt(g2) >= phi - SPACELIKE_MARGIN)
    if bad.size:
        raise SpacelikeError(f"graph is not spacelike at {bad.size} node(s)", bad)

    cosh = 1.0 / np.sqrt(1.0 - g2 / phi ** 2)
    T = np.concatenate([dphi[:, None] * grid.point, phi[:, None]], axis=1)
    lift = np.concatenate([phi[:, None, None] * grid.dpoint,
                           np.zeros(grid.dpoint.shape[:2] + (1,))], axis=2)
    X = du[:, :, None] * T[:, None, :] + lift
    Nvec = cosh[:, None] * (T + np.concatenate([G / phi[:, None], np.zeros((grid.size, 1))], axis=1))
    if model.realization == "minkowski_hyperquadric":
        position = np.concatenate([np.cosh(u)[:, None] * grid.point, np.sinh(u)[:, None]], axis=1)
    else:
        position = np.concatenate([grid.params, u[:, None]], axis=1)

    g = phi[:, None, None] ** 2 * grid.metric - du[:, :, None] * du[:, None, :]
    dN = grid.gradient_params(Nvec)
    hess = -np.einsum("kim,kjm->kij", dN[..., :-1], X[..., :-1]) \
        + np.einsum("ki,kj->kij", dN[..., -1], X[..., -1])
    hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))

    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DiscretizationError("induced metric is not positive definite") from exc
    E = np.swapaxes(np.linalg.inv(L), 1, 2)
    frame_vecs = np.einsum("kia,kim->kam", E, X)
    A = np.swapaxes(E, 1, 2) @ hess @ E
    A = 0.5 * (A + np.swapaxes(A, 1, 2))
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(Nvec))):
        raise DiscretizationError("non-finite shape operator; check pole-adjacent stencils")
    lam = np.linalg.eigvalsh(A)
    pack = pack_from_eigenvalues(lam)
    P = newton_matrices(A, pack.S)
    P = 0.5 * (P + np.swapaxes(P, -1, -2))
    dM = phi ** grid.dim * grid.weights / cosh
    return SurfaceGeometry(model, grid, u, du, phi, dphi, ddphi, cosh, -phi * cosh, T,
                           position, X, Nvec, g, np.linalg.inv(g), E, frame_vecs, A, lam,
                           pack, P, dM)


def pointwise_curvatures(geom):
    """Curvature node fields plus the hypothesis margin ``H_r phi'' - max(H_{r+1} phi', 0)``.

    ``margin[:, r]`` is defined for ``r = 0..n-1``.
    """
    p = geom.pack
    n = geom.n
    H = p.H
    margin = np.stack([H[:, r] * geom.ddphi - np.maximum(H[:, r + 1] * geom.dphi, 0.0)
                       for r in range(n)], axis=1)
    return CurvatureFields(p.S, p.H, p.trP, p.trAP, p.trA2P, p.b, margin)


def integrate(geom, values):
    """``sum values * dM`` with compensated summation in node order."""
    v = np.broadcast_to(np.asarray(values, dtype=float), geom.dM.shape)
    return math.fsum((v * geom.dM).tolist())
