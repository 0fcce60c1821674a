"""Tangential operators on a :class:`~rstab.surface.SurfaceGeometry`.

Gradients and Hessians are formed in the orthonormal frame.  Second
derivatives come from differentiating smooth *ambient* vector fields and
projecting back, ``Hess f(e_a, e_b) = <D_{e_a} grad f, e_b>``; the flat
ambient derivative differs from the Levi-Civita one only by normal (and, on
the hyperquadric, radial) terms that the projection removes.

``L_r`` is available in trace form ``tr(P_r Hess f)`` and in divergence
form ``div(P_r grad f)``.  Their difference is ``<div P_r, grad f>``, which
vanishes in constant-curvature ambients; comparing them is the discrete
check of that fact.
"""

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .surface import integrate, lorentz

__all__ = [
    "gradient",
    "gradient_frame",
    "hessian",
    "hessian_frame",
    "lr_trace_form",
    "lr_divergence_form",
    "dirichlet_form",
    "dirichlet_matrix",
]


def _check_r(geom, r):
    if not isinstance(r, (int, np.integer)) or r < 0 or r > geom.n - 1:
        raise DomainError(f"r must be in [0, {geom.n - 1}], got {r!r}")


def gradient_frame(geom, f):
    """Frame components ``e_a(f)`` of the gradient, shape ``(N, n)``."""
    return geom.frame_derivative(np.asarray(f, dtype=float))


def gradient(geom, f):
    """Gradient in parameter coordinates, ``g^{-1} df``, shape ``(N, n)``."""
    df = geom.grid.gradient_params(np.asarray(f, dtype=float))
    return np.einsum("kij,kj->ki", geom.metric_inv, df)


def hessian_frame(geom, f, symmetrize=True):
    """Hessian in the orthonormal frame, ``(N, n, n)``.

    The raw discrete Hessian is symmetric only up to ``O(h^2)``; its
    symmetric part is returned unless ``symmetrize=False``.
    """
    G = geom.to_ambient(gradient_frame(geom, f))
    dG = geom.frame_derivative(G)
    Hf = lorentz(dG[:, :, None, :], geom.frame_vecs[:, None, :, :])
    if symmetrize:
        Hf = 0.5 * (Hf + np.swapaxes(Hf, 1, 2))
    return Hf


def hessian(geom, f):
    """Hessian as a (1,1)-tensor in parameter coordinates, index raised by ``g^{-1}``."""
    Hf = hessian_frame(geom, f)
    E = geom.frame
    return E @ Hf @ np.swapaxes(E, 1, 2) @ geom.metric


def lr_trace_form(geom, r, f):
    """``L_r f = tr(P_r Hess f)`` at every node."""
    _check_r(geom, r)
    Hf = hessian_frame(geom, f)
    return np.einsum("kab,kba->k", geom.newton[:, r], Hf)


def _divergence_ambient(geom, Y):
    dY = geom.frame_derivative(Y)
    return np.einsum("ka->k", lorentz(dY, geom.frame_vecs))


def _divergence_flux(geom, r, f):
    """Conservative ``(1/sqrt g) d_i(sqrt g P^{ij} d_j f)`` on cell faces."""
    grid = geom.grid
    E = geom.frame
    Pcontra = E @ geom.newton[:, r] @ np.swapaxes(E, 1, 2)
    sqrtg = geom.dM / np.prod(grid.spacing)
    C = sqrtg[:, None, None] * Pcontra
    f = np.asarray(f, dtype=float)
    df = grid.gradient_params(f)
    out = np.zeros(grid.size)
    for i in range(2):
        j = 1 - i
        h = grid.spacing[i]
        plus, minus = grid.neighbours(i)
        pole_plus, pole_minus = grid.pole_faces(i)
        flux = 0.5 * (C[:, i, i] + C[plus, i, i]) * (f[plus] - f) / h \
            + 0.5 * (C[:, i, j] + C[plus, i, j]) * 0.5 * (df[:, j] + df[plus, j])
        flux = np.where(pole_plus, 0.0, flux)
        # face k-1/2 of node k is face +1/2 of its minus neighbour, except across a pole
        flux_minus = np.where(pole_minus, 0.0, flux[minus])
        out += (flux - flux_minus) / h
    return out / sqrtg


def lr_divergence_form(geom, r, f, scheme="ambient"):
    """``L_r f = div(P_r grad f)`` at every node.

    ``scheme="ambient"`` differentiates the ambient field ``P_r grad f``;
    ``scheme="flux"`` uses the conservative coordinate stencil.  On the
    lat-long sphere the flux stencil is only first order at the pole rows
    (second order in integrated norms), since coordinate fluxes are not
    smooth there.
    """
    _check_r(geom, r)
    if scheme == "flux":
        return _divergence_flux(geom, r, f)
    if scheme != "ambient":
        raise DomainError(f"unknown divergence scheme {scheme!r}")
    gf = gradient_frame(geom, f)
    Y = geom.to_ambient(np.einsum("kab,kb->ka", geom.newton[:, r], gf))
    return _divergence_ambient(geom, Y)


def _field_weights(geom, r):
    """``W[:, k, l] = sum_ab c_ak P_ab c_bl`` with ``e_a(f) = sum_k c_ak (K_k f)``."""
    c = np.einsum("kia,kil->kal", geom.frame, geom.grid.coupling)
    return np.einsum("kal,kab,kbm->klm", c, geom.newton[:, r], c)


def dirichlet_form(geom, r, f, g2):
    """``B_r(f, g2) = int <P_r grad f, grad g2> dM``.

    Products of derivatives along the same field average the forward and
    backward differences; mixed products use central ones.  This equals
    the mean over all one-sided sign choices, so it is second-order
    accurate, positive semi-definite for definite ``P_r`` and has no
    grid-scale null space.  ``B_r(f, f) == f @ dirichlet_matrix(geom, r) @ f``.
    """
    _check_r(geom, r)
    f = np.asarray(f, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    W = _field_weights(geom, r)
    grid = geom.grid
    K = grid.n_fields
    acc = np.zeros(geom.size)
    central_f = grid.field_derivatives(f)
    central_g = grid.field_derivatives(g2)
    for k in range(K):
        for l in range(K):
            if k != l:
                acc += W[:, k, l] * central_f[:, k] * central_g[:, l]
        for kind in ("forward", "backward"):
            D = grid.field_matrix(k, kind)
            acc += 0.5 * W[:, k, k] * (D @ f) * (D @ g2)
    return integrate(geom, acc)


def dirichlet_matrix(geom, r):
    """Sparse symmetric matrix ``K`` with ``B_r(f, g) = f @ K @ g``."""
    _check_r(geom, r)
    grid = geom.grid
    W = _field_weights(geom, r) * geom.dM[:, None, None]
    nk = grid.n_fields
    N = grid.size
    out = sp.csr_matrix((N, N))
    central = [grid.field_matrix(k) for k in range(nk)]
    for k in range(nk):
        for l in range(nk):
            if k != l:
                out = out + central[k].T @ sp.diags(W[:, k, l]) @ central[l]
        for kind in ("forward", "backward"):
            D = grid.field_matrix(k, kind)
            out = out + D.T @ sp.diags(0.5 * W[:, k, k]) @ D
    out = 0.5 * (out + out.T)
    return out.tocsr()
