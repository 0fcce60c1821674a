"""Pointwise algebra of shape operators.

Elementary symmetric functions of the principal curvatures, the normalized
mean curvatures ``H_r``, the Newton transformations ``P_r`` and the trace
identities tying them together.  Everything here acts on one symmetric
matrix at a time, or on a stack of them (leading batch axes) where noted.

Sign conventions: ``S_r`` is the r-th elementary symmetric function of the
eigenvalues of ``A`` and ``binom(n, r) H_r = (-1)^r S_r``.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .errors import CapacityError, DomainError

__all__ = [
    "ShapeSample",
    "CurvaturePack",
    "NewtonSequence",
    "TraceResiduals",
    "elem_sym",
    "elementary_symmetric_all",
    "curvature_pack",
    "pack_from_eigenvalues",
    "newton_seq",
    "newton_matrices",
    "newton_reilly",
    "trace_identity_residuals",
    "b_coefficients",
    "REILLY_MAX_N",
]

REILLY_MAX_N = 6
_SYM_TOL = 1e-12


@dataclass(frozen=True)
class ShapeSample:
    """Symmetric shape operator in an orthonormal tangent frame."""

    n: int
    matrix: np.ndarray
    eigenvalues: np.ndarray

    @classmethod
    def from_matrix(cls, matrix):
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"shape operator must be square, got {a.shape}")
        if np.max(np.abs(a - a.T), initial=0.0) > _SYM_TOL * max(1.0, np.abs(a).max()):
            raise DomainError("shape operator is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        lam = np.linalg.eigvalsh(a)
        lam.setflags(write=False)
        return cls(a.shape[0], a, lam)

    @classmethod
    def diag(cls, values):
        return cls.from_matrix(np.diag(np.asarray(values, dtype=float)))

    @property
    def norm(self):
        """Spectral norm of the matrix."""
        return float(np.max(np.abs(self.eigenvalues)))


@dataclass(frozen=True)
class CurvaturePack:
    """Curvature scalars of one or many shape operators.

    Every field is an array whose last axis is indexed by ``r``.  ``S``,
    ``H`` and ``trP`` run over ``0..n``; ``trAP`` and ``trA2P`` over
    ``0..n`` as well (entries past the meaningful range are zero); ``b``
    runs over ``0..n-1``.
    """

    n: int
    S: np.ndarray
    H: np.ndarray
    trP: np.ndarray
    trAP: np.ndarray
    trA2P: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class NewtonSequence:
    """Newton transformations ``P_0 .. P_n`` in the frame of the source sample."""

    P: np.ndarray

    def __getitem__(self, r):
        return self.P[r]

    def __len__(self):
        return len(self.P)


def _check_r(r, n):
    if not isinstance(r, (int, np.integer)) or r < 0 or r > n:
        raise DomainError(f"r must be an integer in [0, {n}], got {r!r}")


def elementary_symmetric_all(eigenvalues):
    """All elementary symmetric functions ``S_0..S_n`` of the last axis.

    Uses the product expansion of ``prod(1 + lambda_i t)``; works on any
    leading batch shape.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.shape[-1]
    e = np.zeros(lam.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        li = lam[..., i, None]
        e[..., 1:i + 2] = e[..., 1:i + 2] + li * e[..., 0:i + 1]
    return e


def elem_sym(eigenvalues, r):
    """r-th elementary symmetric polynomial of ``eigenvalues``; ``r = 0`` gives 1."""
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.shape[-1]
    _check_r(r, n)
    out = elementary_symmetric_all(lam)[..., r]
    return float(out) if out.ndim == 0 else out


def b_coefficients(n):
    """``b_r = (n - r) C(n, r)`` for ``r = 0..n-1``.

    The same numbers are also written ``(r + 1) C(n, r + 1)``; both forms are
    evaluated and required to agree.
    """
    b1 = np.array([(n - r) * comb(n, r) for r in range(n)], dtype=float)
    b2 = np.array([(r + 1) * comb(n, r + 1) for r in range(n)], dtype=float)
    if not np.array_equal(b1, b2):  # pragma: no cover - integer identity
        raise AssertionError("b_r forms disagree")
    return b1


def pack_from_eigenvalues(eigenvalues):
    """Build a :class:`CurvaturePack` from principal curvatures (batched)."""
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.shape[-1]
    S = elementary_symmetric_all(lam)
    Sx = np.concatenate([S, np.zeros(S.shape[:-1] + (2,))], axis=-1)
    r = np.arange(n + 1)
    sign = (-1.0) ** r
    binoms = np.array([comb(n, k) for k in r], dtype=float)
    H = sign * S / binoms
    trP = sign * (n - r) * S
    trAP = sign * (r + 1) * Sx[..., 1:n + 2]
    trA2P = sign * (S[..., 1, None] * Sx[..., 1:n + 2] - (r + 2) * Sx[..., 2:n + 3])
    b = b_coefficients(n)
    return CurvaturePack(n, S, H, trP, trAP, trA2P, b)


def curvature_pack(sample):
    """Curvature scalars of a single :class:`ShapeSample`."""
    return pack_from_eigenvalues(sample.eigenvalues)


def newton_matrices(A, S=None):
    """Newton transformations by the recurrence ``P_r = (-1)^r S_r I + A P_{r-1}``.

    ``A`` may carry leading batch axes; the result has shape
    ``A.shape[:-2] + (n + 1, n, n)``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    if S is None:
        S = elementary_symmetric_all(np.linalg.eigvalsh(A))
    eye = np.eye(n)
    P = np.empty(A.shape[:-2] + (n + 1, n, n))
    P[..., 0, :, :] = eye
    for r in range(1, n + 1):
        P[..., r, :, :] = ((-1) ** r * S[..., r])[..., None, None] * eye + A @ P[..., r - 1, :, :]
    return P


def newton_seq(sample):
    """Newton sequence ``P_0..P_n`` of a :class:`ShapeSample`."""
    S = elementary_symmetric_all(sample.eigenvalues)
    P = newton_matrices(sample.matrix, S)
    # P_r is a polynomial in a symmetric matrix; drop round-off asymmetry
    P = 0.5 * (P + np.swapaxes(P, -1, -2))
    return NewtonSequence(P)


@lru_cache(maxsize=None)
def _signed_permutations(m):
    """All permutations of ``range(m)`` with their signs."""
    return tuple((perm, _perm_sign(perm)) for perm in permutations(range(m)))


def _perm_sign(p):
    p = list(p)
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def newton_reilly(sample, r):
    """Entries of ``P_r`` from the generalized Kronecker symbol sum.

    ``a^r_ij = (-1)^r / r! * sum eps^{j_1..j_r j}_{i_1..i_r i} a_{j_1 i_1}..a_{j_r i_r}``.

    The upper indices must be a permutation of the (pairwise distinct) lower
    ones, so for each unordered set ``T`` of ``r`` lower indices avoiding
    ``i`` the ``r!`` orderings contribute identically; the enumeration runs
    over sets ``T`` and over the permutations of ``T + {i}`` that end in
    ``j``.  No recurrence or eigendecomposition is involved.
    """
    n = sample.n
    _check_r(r, n)
    if n > REILLY_MAX_N:
        raise CapacityError(f"direct enumeration is limited to n <= {REILLY_MAX_N}, got n={n}")
    a = np.asarray(sample.matrix, dtype=float)
    out = np.zeros((n, n))
    if r == 0:
        return np.eye(n)
    if r + 1 > n:
        return out
    sgn = (-1) ** r
    for i in range(n):
        others = [k for k in range(n) if k != i]
        for T in combinations(others, r):
            lower = T + (i,)
            for perm, sign in _signed_permutations(r + 1):
                upper = [lower[p] for p in perm]
                term = 1.0
                for k in range(r):
                    term *= a[upper[k], lower[k]]
                out[i, upper[-1]] += sign * term
    return sgn * out


def _reilly_literal(sample, r):
    """Literal sum over all ordered index tuples; exponential cost, tests only."""
    n = sample.n
    a = np.asarray(sample.matrix, dtype=float)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            total = 0.0
            for lower_r in np.ndindex(*(n,) * r):
                lower = tuple(lower_r) + (i,)
                if len(set(lower)) != r + 1:
                    continue
                for upper_r in np.ndindex(*(n,) * r):
                    upper = tuple(upper_r) + (j,)
                    if sorted(upper) != sorted(lower):
                        continue
                    perm = [lower.index(x) for x in upper]
                    term = float(_perm_sign(perm))
                    for k in range(r):
                        term *= a[upper[k], lower[k]]
                    total += term
            out[i, j] = total
    return (-1) ** r / factorial(r) * out


@dataclass(frozen=True)
class TraceResiduals:
    """Absolute residuals of the trace identities, one entry per ``r``.

    ``trP``, ``trAP`` and ``trA2P`` compare traces of the recurrence
    matrices against the closed forms in :func:`curvature_pack`.  ``eig``
    holds, for each ``r``, the worst of ``|P_r e_i - (-1)^r S_r(A_i) e_i|``
    and ``|S_r(A_i) - S_r + lambda_i S_{r-1}(A_i)|`` over eigenvectors
    ``e_i``; it is NaN when the spectrum is too clustered (gap < 1e-8).
    """

    trP: np.ndarray
    trAP: np.ndarray
    trA2P: np.ndarray
    eig: np.ndarray
    Pn: float
    scale: float

    @property
    def max(self):
        vals = [self.trP.max(), self.trAP.max(), self.trA2P.max(), self.Pn]
        if not np.all(np.isnan(self.eig)):
            vals.append(np.nanmax(self.eig))
        return float(max(vals))


def trace_identity_residuals(sample):
    """Check the trace identities for every ``r = 0..n``."""
    n = sample.n
    A = sample.matrix
    pack = curvature_pack(sample)
    P = newton_seq(sample).P
    b = np.append(pack.b, 0.0)
    Hx = np.append(pack.H, 0.0)
    S = pack.S
    res_trP = np.empty(n + 1)
    res_trAP = np.empty(n + 1)
    res_trA2P = np.empty(n + 1)
    for r in range(n + 1):
        res_trP[r] = abs(np.trace(P[r]) - (-1) ** r * (n - r) * S[r])
        res_trAP[r] = abs(np.trace(A @ P[r]) + b[r] * Hx[r + 1])
        res_trA2P[r] = abs(np.trace(A @ A @ P[r]) - pack.trA2P[r])

    res_eig = np.full(n + 1, np.nan)
    lam, vecs = np.linalg.eigh(A)
    gap = np.min(np.diff(lam)) if n > 1 else np.inf
    if gap >= 1e-8:
        for r in range(n + 1):
            worst = 0.0
            for i in range(n):
                rest = np.delete(lam, i)
                Si = elementary_symmetric_all(rest)
                Sr_i = Si[r] if r <= n - 1 else 0.0
                Srm1_i = Si[r - 1] if r >= 1 else 0.0
                e = vecs[:, i]
                worst = max(worst, np.linalg.norm(P[r] @ e - (-1) ** r * Sr_i * e))
                if r >= 1:
                    worst = max(worst, abs(Sr_i - (S[r] - lam[i] * Srm1_i)))
            res_eig[r] = worst
    scale = max(1.0, sample.norm ** n)
    return TraceResiduals(res_trP, res_trAP, res_trA2P, res_eig,
                          float(np.abs(P[n]).max()), scale)
