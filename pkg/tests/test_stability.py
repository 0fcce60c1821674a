import math

import numpy as np
import pytest

from helpers import CYL, DS, SPHERE_LEVELS, geometry, grid, slope
from rstab import stability
from rstab.errors import DomainError
from rstab.families import real_harmonic
from rstab.stability import (
    form_matrix,
    hypothesis_margins,
    stability_form,
    stability_report,
    stability_spectrum,
    support_identity_residual,
    theorem_probe,
    verdict_tolerance,
)
from rstab.surface import embed_graph


@pytest.mark.parametrize("expr", ["slice(0)", "slice(ln2)", "slice(-1.1)"])
def test_constant_function_on_slices(expr):
    # n (1 - tanh^2) cosh^2 |S^2| = 8 pi on every de Sitter slice
    geom = geometry("sphere", (64, 128), expr)
    q = stability_form(geom, 0, np.ones(geom.size))
    assert q == pytest.approx(8 * math.pi, abs=20 * geom.h ** 2)


def test_equator_r1_form_vanishes():
    geom = geometry("sphere", (16, 32), "slice(0)")
    f = real_harmonic(3, 2, *geom.grid.params.T)
    assert stability_form(geom, 1, f) == 0.0
    assert form_matrix(geom, 1).count_nonzero() == 0


def test_form_matrix_matches_form():
    geom = geometry("sphere", (16, 32), "slice_plus(ln2, 0.1, harmonic(2,1))")
    f = real_harmonic(2, 0, *geom.grid.params.T) + geom.grid.point[:, 0]
    for r in (0, 1):
        M = form_matrix(geom, r)
        assert f @ M @ f == pytest.approx(stability_form(geom, r, f), rel=1e-10)


def test_spectrum_equator_r1_marginal():
    s = stability_spectrum(geometry("sphere", (16, 32), "slice(0)"), 1)
    np.testing.assert_array_equal(s.eigenvalues, 0.0)
    assert s.verdict == "marginal"


@pytest.mark.parametrize("r,top", [(0, 1.28), (1, 1.536)])
def test_spectrum_ln2_slice(r, top):
    # with P_r = p_r I on the slice, mu_l = (r+1) [V_r - p_r l(l+1) / cosh^2(s0)]; l = 0 is on top
    hs, errs = [], []
    for res in SPHERE_LEVELS[:2]:
        s = stability_spectrum(geometry("sphere", res, "slice(ln2)"), r)
        hs.append(grid("sphere", res).h)
        errs.append(abs(s.top - top))
        assert s.symmetry == 0.0
    assert errs[-1] < 10 * hs[-1] ** 2
    assert s.verdict == "unstable"
    assert s.witness_value > 0
    np.testing.assert_allclose(s.witness / s.witness.mean(), 1.0, atol=1e-6)


def test_spectrum_ln2_second_eigenvalue_is_zero():
    # l = 1 harmonics: 1.28 - 2 / 1.5625 = 0
    s = stability_spectrum(geometry("sphere", (32, 64), "slice(ln2)"), 0)
    assert abs(s.eigenvalues[1]) < 10 * (math.pi / 32) ** 2


def test_spectrum_cylinder_slice_marginal():
    s = stability_spectrum(geometry("torus", (16, 16), "slice(0)"), 0)
    assert abs(s.top) < 1e-10
    assert s.verdict == "marginal"
    assert s.eigenvalues[1] < -0.5


def test_verdict_thresholds():
    geom = geometry("sphere", (16, 32), "slice(ln2)")
    assert verdict_tolerance(geom) == pytest.approx(100 * (math.pi / 16) ** 2)
    assert stability._classify(2.0, 1.0) == "unstable"
    assert stability._classify(-2.0, 1.0) == "strongly-r-stable"
    assert stability._classify(0.5, 1.0) == "marginal"


def test_sparse_path_matches_dense(monkeypatch):
    geom = geometry("sphere", (16, 32), "slice_plus(ln2, 0.1, harmonic(2,1))")
    dense = stability_spectrum(geom, 0, k=3)
    monkeypatch.setattr(stability, "DENSE_LIMIT", 10)
    sparse = stability_spectrum(geom, 0, k=3)
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, atol=1e-8)
    assert sparse.witness_value == pytest.approx(dense.witness_value, rel=1e-8)


def test_sparse_path_is_reproducible(monkeypatch):
    geom = geometry("sphere", (16, 32), "slice(ln2)")
    monkeypatch.setattr(stability, "DENSE_LIMIT", 10)
    a = stability_spectrum(geom, 0, k=2)
    b = stability_spectrum(geom, 0, k=2)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)


@pytest.mark.parametrize("expr", ["slice(ln2)", "slice(0)", "slice(-0.4)"])
@pytest.mark.parametrize("r", [0, 1])
def test_support_identity_on_de_sitter_slices(expr, r):
    geom = geometry("sphere", (32, 64), expr)
    rep = support_identity_residual(geom, r)
    assert rep.max < 10 * geom.h ** 2
    assert rep.npsi_fd_residual < 1e-7


@pytest.mark.parametrize("r", [0, 1])
def test_support_identity_cylinder_slice_exact(r):
    rep = support_identity_residual(geometry("torus", (16, 16), "slice(0.5)"), r)
    assert rep.max == 0.0


@pytest.mark.parametrize("r", [0, 1])
def test_support_identity_converges_on_perturbed_graph(r):
    hs, errs = [], []
    for res in SPHERE_LEVELS:
        geom = geometry("sphere", res, "slice_plus(ln2, 0.05, harmonic(1,0))")
        hs.append(geom.h)
        errs.append(support_identity_residual(geom, r).max)
    assert slope(hs, errs) == pytest.approx(2.0, abs=0.3)


def test_support_identity_cylinder_graph():
    g = grid("torus", (32, 32))
    x, y = g.params.T
    geom = embed_graph(CYL, g, 0.2 * np.sin(x) * np.cos(y))
    for r in (0, 1):
        assert support_identity_residual(geom, r).max < 10 * g.h ** 2


def test_margins_on_ln2_slice():
    geom = geometry("sphere", (32, 64), "slice(ln2)")
    m = hypothesis_margins(geom, 1)
    assert np.abs(m.margin - 0.48).max() < 10 * geom.h ** 2
    assert m.satisfied and m.nondegenerate
    assert m.corollary_min == pytest.approx(0.6 - 0.36, abs=10 * geom.h ** 2)
    assert m.equator_fraction == 0.0


def test_margins_degenerate_on_cylinder_and_equator():
    m = hypothesis_margins(geometry("torus", (16, 16), "slice(0)"), 0)
    assert m.flat_fraction == pytest.approx(1.0) and not m.nondegenerate
    assert m.corollary_margin is None
    eq = hypothesis_margins(geometry("sphere", (16, 32), "slice(0)"), 0)
    assert not eq.nondegenerate and eq.equator_fraction == pytest.approx(1.0)


def test_report_flags():
    rep = stability_report(geometry("sphere", (16, 32), "slice(0)"), 0, k=2)
    assert rep.is_slice and rep.is_r_maximal
    rep = stability_report(geometry("sphere", (32, 64), "slice_plus(ln2, 0.02, harmonic(1,0))"),
                           0, k=2)
    assert not rep.is_slice and not rep.is_r_maximal
    assert rep.verdict == "unstable" and rep.top > rep.spectrum.tol


def test_probe_small_family():
    rows = theorem_probe(DS, [("slice(ln2)", 0), ("slice_plus(ln2, 0.05, harmonic(1,0))", 0)],
                         resolution=(32, 64))
    assert [row.claim for row in rows] == [False, True]
    assert all(row.consistent for row in rows)
    assert rows[1].verdict == "unstable" and rows[1].witness_value > 0
    assert set(rows[0].as_dict()) >= {"surface", "r", "verdict", "claim", "consistent"}


def test_probe_requires_r():
    with pytest.raises(DomainError):
        theorem_probe(DS, ["slice(ln2)"], resolution=(16, 32))


def test_r_out_of_range():
    geom = geometry("sphere", (16, 32), "slice(ln2)")
    with pytest.raises(DomainError):
        stability_spectrum(geom, 2)
    with pytest.raises(DomainError):
        hypothesis_margins(geom, -1)
