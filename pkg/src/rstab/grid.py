"""Structured fiber grids with finite-difference operators.

Sphere grids are cell-centred in colatitude, ``theta_i = (i + 1/2) pi / N_theta``,
so no node sits on a pole.  A central difference in ``theta`` on the first
(last) row reads a ghost value at ``-h/2`` (``pi + h/2``); that point is the
node of the same row at longitude ``phi + pi``, which is why ``N_phi`` must
be even.  This closure is exact for any scalar field, including the
Cartesian components of ambient vector fields.

Derivatives are taken along a fixed set of smooth vector fields ``K_k`` on
the fiber whose outer products sum to the inverse fiber metric, so that
``grad f = sum_k (K_k f) K_k``.  On the torus these are the coordinate
fields.  On the sphere they are the three rotation generators
``K_k = e_k x q``; a central difference along ``K_k`` compares the field at
the node rotated by ``+-delta`` about axis ``e_k``.  Rotation about ``e_z``
is a shift by one longitude; the other two read off-grid values through
6-point Lagrange interpolation in ``(theta, phi)``.  Unlike coordinate
differences, the truncation error ``delta^2/6 K_k^3 f`` is a smooth field
on the whole sphere, so composed operators keep second order on the rows
next to the poles.

Nodes are flattened in C order, ``index = i * n2 + j``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DiscretizationError, DomainError

__all__ = ["FiberGrid", "build_fiber_grid", "sphere_grid", "torus_grid", "MIN_RESOLUTION"]

MIN_RESOLUTION = 8


@dataclass(frozen=True, eq=False)
class FiberGrid:
    """Discretized fiber of dimension two.

    Attributes
    ----------
    kind : str
        ``"sphere"`` or ``"torus"``.
    shape : tuple of int
        Nodes per parameter axis.
    spacing : ndarray
        Parameter step per axis.
    params : ndarray, shape (N, 2)
        Node parameters, ``(theta, phi)`` or ``(x, y)``.
    point : ndarray, shape (N, m)
        Fiber point in its Cartesian realization (unit vector in R^3 for the
        sphere, zeros for the torus, whose Cartesian position is never used).
    dpoint : ndarray, shape (N, 2, m)
        Parameter derivatives of the fiber point, i.e. the coordinate
        tangents of the fiber as Cartesian vectors.
    metric : ndarray, shape (N, 2, 2)
        Fiber metric in parameter coordinates.
    fields : ndarray, shape (N, K, m)
        Differentiation fields ``K_k`` as Cartesian fiber vectors.
    coupling : ndarray, shape (N, 2, K)
        ``<d_i point, K_k>``; parameter derivatives are
        ``d_i f = sum_k coupling[:, i, k] (K_k f)``.
    weights : ndarray, shape (N,)
        Quadrature weights of the fiber volume element.
    """

    kind: str
    shape: tuple
    spacing: np.ndarray
    params: np.ndarray
    point: np.ndarray
    dpoint: np.ndarray
    metric: np.ndarray
    weights: np.ndarray
    fields: np.ndarray
    coupling: np.ndarray
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def size(self):
        return int(self.shape[0] * self.shape[1])

    @property
    def dim(self):
        return 2

    @property
    def h(self):
        """Mesh spacing used for tolerances and convergence fits."""
        return float(np.max(self.spacing))

    @property
    def fiber_volume(self):
        return 4 * np.pi if self.kind == "sphere" else 4 * np.pi ** 2

    @property
    def metric_inv(self):
        if "ginv" not in self._ops:
            self._ops["ginv"] = np.linalg.inv(self.metric)
        return self._ops["ginv"]

    def reshape(self, values):
        return np.asarray(values).reshape(self.shape + np.shape(values)[1:])

    def spec(self):
        """Plain-data description, suitable for hashing and manifests."""
        return {"kind": self.kind, "resolution": [int(s) for s in self.shape]}

    # -- finite differences -------------------------------------------------

    def neighbours(self, axis):
        """Index arrays of the +1 and -1 neighbours along ``axis``.

        On the sphere the ``theta`` neighbour across a pole is the antipodal
        node of the same row.
        """
        n1, n2 = self.shape
        i, j = np.divmod(np.arange(self.size), n2)
        if axis == 1 or self.kind == "torus":
            if axis == 0:
                plus = ((i + 1) % n1) * n2 + j
                minus = ((i - 1) % n1) * n2 + j
            else:
                plus = i * n2 + (j + 1) % n2
                minus = i * n2 + (j - 1) % n2
            return plus, minus
        anti = (j + n2 // 2) % n2
        plus = np.where(i + 1 < n1, (i + 1) * n2 + j, i * n2 + anti)
        minus = np.where(i - 1 >= 0, (i - 1) * n2 + j, i * n2 + anti)
        return plus, minus

    def diff_matrix(self, axis, kind="central"):
        """Sparse first-derivative matrix along a parameter axis.

        ``kind`` is ``"central"``, ``"forward"`` or ``"backward"``.
        """
        key = (axis, kind)
        if key in self._ops:
            return self._ops[key]
        N = self.size
        h = float(self.spacing[axis])
        plus, minus = self.neighbours(axis)
        rows = np.arange(N)
        if kind == "central":
            data = np.concatenate([np.full(N, 0.5 / h), np.full(N, -0.5 / h)])
            cols = np.concatenate([plus, minus])
        elif kind == "forward":
            data = np.concatenate([np.full(N, 1 / h), np.full(N, -1 / h)])
            cols = np.concatenate([plus, rows])
        elif kind == "backward":
            data = np.concatenate([np.full(N, 1 / h), np.full(N, -1 / h)])
            cols = np.concatenate([rows, minus])
        else:
            raise DomainError(f"unknown difference kind {kind!r}")
        D = sp.csr_matrix((data, (np.concatenate([rows, rows]), cols)), shape=(N, N))
        self._ops[key] = D
        return D

    def pole_faces(self, axis):
        """Boolean masks ``(plus, minus)`` of faces that cross a pole.

        These faces have zero length and carry no flux.
        """
        n1, n2 = self.shape
        i = np.arange(self.size) // n2
        none = np.zeros(self.size, dtype=bool)
        if self.kind != "sphere" or axis != 0:
            return none, none
        return i == n1 - 1, i == 0

    def diff(self, values, axis):
        """Central difference along a parameter axis (trailing component axes allowed)."""
        v = np.asarray(values, dtype=float)
        flat = v.reshape(self.size, -1)
        return (self.diff_matrix(axis) @ flat).reshape(v.shape)

    # -- derivatives along the differentiation fields ----------------------

    @property
    def n_fields(self):
        return int(self.fields.shape[1])

    def field_matrix(self, k, kind="central"):
        """Sparse first-derivative matrix along the field ``K_k``.

        ``kind`` is ``"central"``, ``"forward"`` or ``"backward"``.
        """
        key = ("field", k, kind)
        if key in self._ops:
            return self._ops[key]
        if kind not in ("central", "forward", "backward"):
            raise DomainError(f"unknown difference kind {kind!r}")
        if self.kind == "torus":
            D = self.diff_matrix(k, kind)
        elif k == 2:
            D = self.diff_matrix(1, kind)
        else:
            delta, plus, minus = self._rotation_stencil(k)
            eye = sp.identity(self.size, format="csr")
            if kind == "central":
                D = (plus - minus) / (2 * delta)
            elif kind == "forward":
                D = (plus - eye) / delta
            else:
                D = (eye - minus) / delta
            D = D.tocsr()
        self._ops[key] = D
        return D

    def _rotation_stencil(self, k):
        key = ("rot", k)
        if key not in self._ops:
            delta = float(self.spacing[1])
            axis = np.eye(3)[k]
            mats = [_sphere_interpolation(self, _rotate(self.point, axis, sgn * delta))
                    for sgn in (1.0, -1.0)]
            self._ops[key] = (delta, mats[0], mats[1])
        return self._ops[key]

    def field_derivatives(self, values, kind="central"):
        """Derivatives along every field, shape ``(N, K) + trailing``."""
        v = np.asarray(values, dtype=float)
        flat = v.reshape(self.size, -1)
        out = [(self.field_matrix(k, kind) @ flat).reshape(v.shape) for k in range(self.n_fields)]
        return np.stack(out, axis=1)

    def gradient_params(self, values):
        """Parameter derivatives ``d_i f = sum_k <d_i point, K_k> (K_k f)``, shape ``(N, 2) + trailing``."""
        d = self.field_derivatives(values)
        return np.einsum("kil,kl...->ki...", self.coupling, d)


def _rotate(points, axis, angle):
    """Rotate unit vectors about ``axis`` by ``angle`` (right-handed)."""
    c, s = np.cos(angle), np.sin(angle)
    cross = np.cross(axis, points)
    dot = points @ axis
    return c * points + s * cross + (1 - c) * dot[:, None] * axis[None, :]


def _lagrange_weights(offset, npts):
    """Weights of the ``npts``-point Lagrange interpolant at fractional offsets.

    Stencil nodes sit at ``0..npts-1``; ``offset`` is measured in the same units.
    """
    nodes = np.arange(npts, dtype=float)
    w = np.ones(offset.shape + (npts,))
    for a in range(npts):
        for b in range(npts):
            if a != b:
                w[..., a] *= (offset - nodes[b]) / (nodes[a] - nodes[b])
    return w


_INTERP_POINTS = 6


def _sphere_interpolation(grid, points):
    """Sparse matrix evaluating node fields at arbitrary sphere points.

    Tensor-product 6-point Lagrange interpolation in ``(theta, phi)``; rows
    beyond a pole are read from the antipodal longitude.
    """
    n1, n2 = grid.shape
    dth, dph = grid.spacing
    z = np.clip(points[:, 2], -1.0, 1.0)
    th = np.arccos(z)
    ph = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
    m = _INTERP_POINTS
    half = m // 2 - 1
    st = th / dth - 0.5
    i0 = np.floor(st).astype(int) - half
    sp_ = ph / dph
    j0 = np.floor(sp_).astype(int) - half
    wt = _lagrange_weights(st - i0, m)
    wp = _lagrange_weights(sp_ - j0, m)
    rows, cols, vals = [], [], []
    N = points.shape[0]
    idx = np.arange(N)
    for a in range(m):
        i = i0 + a
        shift = np.zeros(N, dtype=int)
        low = i < 0
        high = i >= n1
        i = np.where(low, -1 - i, np.where(high, 2 * n1 - 1 - i, i))
        shift = np.where(low | high, n2 // 2, 0)
        for b in range(m):
            j = np.mod(j0 + b + shift, n2)
            rows.append(idx)
            cols.append(i * n2 + j)
            vals.append(wt[:, a] * wp[:, b])
    M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N, grid.size))
    M.sum_duplicates()
    return M


def sphere_grid(n_theta, n_phi=None):
    """Lat-long grid of the unit sphere, ``n_phi = 2 n_theta`` by default."""
    n_phi = 2 * n_theta if n_phi is None else n_phi
    if n_theta < MIN_RESOLUTION or n_phi < MIN_RESOLUTION:
        raise DiscretizationError(f"resolution must be >= {MIN_RESOLUTION} per axis")
    if n_phi % 2:
        raise DiscretizationError("pole closure needs an even number of longitudes")
    dth = np.pi / n_theta
    dph = 2 * np.pi / n_phi
    th = (np.arange(n_theta) + 0.5) * dth
    ph = np.arange(n_phi) * dph
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    TH, PH = TH.ravel(), PH.ravel()
    st, ct, sp_, cp = np.sin(TH), np.cos(TH), np.sin(PH), np.cos(PH)
    point = np.stack([st * cp, st * sp_, ct], axis=-1)
    d_th = np.stack([ct * cp, ct * sp_, -st], axis=-1)
    d_ph = np.stack([-st * sp_, st * cp, np.zeros_like(st)], axis=-1)
    metric = np.zeros((TH.size, 2, 2))
    metric[:, 0, 0] = 1.0
    metric[:, 1, 1] = st ** 2
    weights = st * dth * dph
    dpoint = np.stack([d_th, d_ph], axis=1)
    fields = np.stack([np.cross(e, point) for e in np.eye(3)], axis=1)
    coupling = np.einsum("kim,klm->kil", dpoint, fields)
    return FiberGrid("sphere", (n_theta, n_phi), np.array([dth, dph]),
                     np.stack([TH, PH], axis=-1), point, dpoint, metric, weights,
                     fields, coupling)


def torus_grid(n_x, n_y=None):
    """Periodic grid of the flat torus ``[0, 2 pi)^2``."""
    n_y = n_x if n_y is None else n_y
    if n_x < MIN_RESOLUTION or n_y < MIN_RESOLUTION:
        raise DiscretizationError(f"resolution must be >= {MIN_RESOLUTION} per axis")
    dx = 2 * np.pi / n_x
    dy = 2 * np.pi / n_y
    X, Y = np.meshgrid(np.arange(n_x) * dx, np.arange(n_y) * dy, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    N = X.size
    dpoint = np.zeros((N, 2, 2))
    dpoint[:, 0, 0] = 1.0
    dpoint[:, 1, 1] = 1.0
    metric = np.broadcast_to(np.eye(2), (N, 2, 2)).copy()
    weights = np.full(N, dx * dy)
    coupling = np.broadcast_to(np.eye(2), (N, 2, 2)).copy()
    return FiberGrid("torus", (n_x, n_y), np.array([dx, dy]), np.stack([X, Y], axis=-1),
                     np.zeros((N, 2)), dpoint, metric, weights, dpoint.copy(), coupling)


def build_fiber_grid(model, resolution):
    """Grid matching the fiber of ``model``; ``resolution`` is ``(n1, n2)`` or ``n1``."""
    if model.n != 2:
        raise DiscretizationError(f"grids are two-dimensional; model has n={model.n}")
    res = tuple(np.atleast_1d(resolution).astype(int).tolist())
    if model.fiber_kind == "sphere":
        return sphere_grid(*res)
    return torus_grid(*res)
