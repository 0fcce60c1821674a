import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from helpers import grid
from rstab.errors import DomainError, ManifestError
from rstab.families import (
    f0_values,
    graph_values,
    list_families,
    load_graph_csv,
    parse_call,
    real_harmonic,
    theorem_catalog,
)


def test_parse_nested_call():
    assert parse_call("slice_plus(ln2, 0.05, harmonic(1,0))") == \
        ("slice_plus", ["ln2", "0.05", "harmonic(1,0)"])
    assert parse_call("slice(0)") == ("slice", ["0"])
    with pytest.raises(ManifestError):
        parse_call("slice 0")


@pytest.mark.parametrize("l1,m1,l2,m2", [(1, 0, 1, 0), (2, 1, 2, 1), (2, -1, 2, 1), (3, 2, 1, 1)])
def test_harmonics_are_orthonormal(l1, m1, l2, m2):
    val, _ = dblquad(lambda th, ph: real_harmonic(l1, m1, th, ph) * real_harmonic(l2, m2, th, ph)
                     * math.sin(th), 0, 2 * math.pi, 0, math.pi)
    assert val == pytest.approx(float((l1, m1) == (l2, m2)), abs=1e-8)


def test_harmonic_closed_forms():
    th = np.linspace(0.1, 3.0, 7)
    ph = np.linspace(0.0, 6.0, 7)
    c = math.sqrt(3 / (4 * math.pi))
    np.testing.assert_allclose(real_harmonic(1, 0, th, ph), c * np.cos(th))
    # no Condon-Shortley phase: Y_11 is proportional to +x
    np.testing.assert_allclose(real_harmonic(1, 1, th, ph), c * np.sin(th) * np.cos(ph))
    np.testing.assert_allclose(real_harmonic(1, -1, th, ph), c * np.sin(th) * np.sin(ph))
    with pytest.raises(DomainError):
        real_harmonic(1, 2, th, ph)


def test_graph_values():
    g = grid("sphere", (16, 32))
    np.testing.assert_allclose(graph_values(g, "slice(ln2)"), math.log(2))
    u = graph_values(g, "slice_plus(0.3, 0.1, harmonic(2,0))")
    np.testing.assert_allclose(u, 0.3 + 0.1 * real_harmonic(2, 0, *g.params.T))
    t = grid("torus", (16, 16))
    u = graph_values(t, "slice_plus(0, 0.1, fourier(1,1))")
    np.testing.assert_allclose(u, 0.1 * np.cos(t.params[:, 0] + t.params[:, 1]))


def test_f0_values():
    t = grid("torus", (16, 16))
    np.testing.assert_allclose(f0_values(t, "const(2)"), 2.0)
    np.testing.assert_allclose(f0_values(t, "fourier(1,0,0.5)"), 0.5 * np.cos(t.params[:, 0]))


def test_family_errors_suggest_names():
    g = grid("sphere", (16, 32))
    with pytest.raises(ManifestError, match="slice_plus"):
        graph_values(g, "slice_pls(0, 0.1, harmonic(1,0))")
    with pytest.raises(ManifestError, match="takes"):
        graph_values(g, "slice(0, 1)")
    with pytest.raises(ManifestError, match="sphere"):
        graph_values(grid("torus", (16, 16)), "slice_plus(0, 0.1, harmonic(1,0))")
    with pytest.raises(ManifestError, match="number"):
        graph_values(g, "slice(abc)")


def test_csv_round_trip(tmp_path):
    g = grid("torus", (8, 8))
    u = 0.1 * np.sin(g.params[:, 0])
    path = tmp_path / "graph.csv"
    lines = ["node,u"] + [f"{k},{float(v)!r}" for k, v in enumerate(u)]
    path.write_text("\n".join(lines) + "\n")
    np.testing.assert_array_equal(load_graph_csv(path, g), u)
    np.testing.assert_array_equal(graph_values(g, f"csv('{path}')"), u)
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DomainError, match="missing"):
        load_graph_csv(path, g)
    path.write_text("\n".join(lines + ["3,abc"]) + "\n")
    with pytest.raises(DomainError, match="malformed"):
        load_graph_csv(path, g)


def test_catalog_size_and_round_trip():
    cat = list_families()
    entries = sum(len(v) for v in cat["catalog"].values())
    assert entries >= 12
    for kind, items in cat["catalog"].items():
        assert [(e["graph"], e["r"]) for e in items] == theorem_catalog(kind)
        fiber = grid("sphere", (16, 32)) if kind == "de_sitter" else grid("torus", (16, 16))
        for e in items:
            assert graph_values(fiber, e["graph"]).shape == (fiber.size,)
    eps = {float(parse_call(g)[1][1]) for g, r in theorem_catalog("de_sitter")
           if g.startswith("slice_plus(ln2") and "harmonic(1,0)" in g and r == 0}
    assert eps == {0.02, 0.05, 0.1}
