"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected in the terminal
summary) and then asserts it.  Refinement studies use the sphere levels
16x32, 32x64, 64x128 and the torus levels 16x16, 32x32, 64x64.
"""

import json
import math
import time

import numpy as np

from conftest import record
from helpers import CYL, DS, LN2, SPHERE_LEVELS, TORUS_LEVELS, geometry, grid, levels, slope
from rstab import cli
from rstab.calculus import dirichlet_form, lr_divergence_form, lr_trace_form
from rstab.curvalg import ShapeSample, newton_reilly, newton_seq, trace_identity_residuals
from rstab.families import fourier_mode, real_harmonic, theorem_catalog
from rstab.harness import run
from rstab.spacetime import curvature_residuals
from rstab.stability import support_identity_residual, theorem_probe
from rstab.surface import integrate
from rstab.variation import (
    first_variation_check,
    jacobi_series,
    make_variation,
    second_variation_check,
)

ORDER_BAND = (1.7, 2.3)
MIN_ORDER = 1.7
FLOOR = 1e-10

PERTURBED = {"sphere": "slice_plus(ln2, 0.1, harmonic(2,1))",
             "torus": "slice_plus(0, 0.2, fourier(1,1))"}


def _second_order(h, err, floor=FLOOR):
    """At least second order, or already at round-off on every level."""
    p = slope(h, err)
    return (max(err) < floor or p >= MIN_ORDER), p


def _order_note(errs, p, floor=FLOOR):
    return "exact" if max(errs) < floor else f"{p:.2f}"


def model_for(kind):
    return DS if kind == "sphere" else CYL


def _smooth(g, seed):
    rng = np.random.default_rng(seed)
    a, b = g.params.T
    if g.kind == "sphere":
        return sum(rng.standard_normal() * real_harmonic(l, m, a, b)
                   for l in range(4) for m in range(-l, l + 1))
    return sum(rng.standard_normal() * fourier_mode(kx, ky, a, b) + rng.standard_normal()
               * np.sin(kx * a + ky * b) for kx in range(-2, 3) for ky in range(3))


def _f0_for(g):
    a, b = g.params.T
    return real_harmonic(2, 1, a, b) if g.kind == "sphere" else np.sin(a) * np.cos(b)


def _base_for(g, kind):
    a, b = g.params.T
    if kind == "sphere":
        return LN2 + 0.1 * real_harmonic(2, 1, a, b)
    return 0.2 * np.sin(a) * np.cos(b)


def test_criterion_01_newton_operator_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_rel = worst_pn = worst_trace = 0.0
    count = 0
    for n in range(2, 7):
        for _ in range(20):
            a = rng.standard_normal((n, n))
            s = ShapeSample.from_matrix(0.5 * (a + a.T))
            P = newton_seq(s).P
            scale = max(1.0, np.abs(P).max())
            for r in range(n + 1):
                worst_rel = max(worst_rel, np.abs(newton_reilly(s, r) - P[r]).max() / scale)
            bound = 1 + s.norm ** n
            worst_pn = max(worst_pn, np.abs(P[n]).max() / bound)
            worst_trace = max(worst_trace, trace_identity_residuals(s).max / bound)
            count += 1
    elapsed = time.perf_counter() - t0
    ok = (count >= 100 and worst_rel < 1e-9 and worst_pn < 1e-9 and worst_trace < 1e-9
          and elapsed < 10)
    assert record(1, ok, f"{count} samples, recurrence vs Reilly {worst_rel:.1e}, "
                         f"|P_n| {worst_pn:.1e}, trace {worst_trace:.1e}, {elapsed:.2f} s")


def test_criterion_02_constant_curvature_ode():
    s = np.linspace(-3, 3, 100)
    worst = 0.0
    for model in (DS, CYL):
        r1, r2 = curvature_residuals(model, s)
        worst = max(worst, np.abs(r1).max(), np.abs(r2).max())
    assert record(2, worst < 1e-10, f"max ODE residual {worst:.1e} over 100 samples, both models")


def test_criterion_03_slice_calibration():
    hs, shape_err, area_err = [], [], []
    for res in SPHERE_LEVELS:
        geom = geometry("sphere", res, "slice(ln2)")
        hs.append(geom.h)
        shape_err.append(np.abs(geom.shape + 0.6 * np.eye(2)).max())
        area_err.append(abs(geom.area - 6.25 * math.pi))
    p_shape, p_area = slope(hs, shape_err), slope(hs, area_err)
    lo, hi = ORDER_BAND
    ok = lo <= p_shape <= hi and lo <= p_area <= hi
    assert record(3, ok, f"shape operator order {p_shape:.2f}, area order {p_area:.2f}")


def test_criterion_04_lr_consistency():
    notes, ok = [], True
    for kind in ("sphere", "torus"):
        for r in (0, 1):
            hs, div_err, ibp_err = [], [], []
            for res in levels(kind):
                geom = geometry(kind, res, PERTURBED[kind])
                hs.append(geom.h)
                f = _smooth(geom.grid, 40)
                div_err.append(np.abs(lr_trace_form(geom, r, f)
                                      - lr_divergence_form(geom, r, f)).max())
                worst = 0.0
                for k in range(5):
                    f, g = _smooth(geom.grid, 2 * k), _smooth(geom.grid, 2 * k + 1)
                    worst = max(worst, abs(integrate(geom, lr_trace_form(geom, r, f) * g)
                                           + dirichlet_form(geom, r, f, g)))
                ibp_err.append(worst)
            ok_div, p_div = _second_order(hs, div_err, floor=1e-9)
            ok_ibp, p_ibp = _second_order(hs, ibp_err)
            ok = ok and ok_div and ok_ibp
            notes.append(f"{kind[0]}{r}: div {_order_note(div_err, p_div, 1e-9)}, "
                         f"ibp {_order_note(ibp_err, p_ibp)}")
    assert record(4, ok, "; ".join(notes))


def test_criterion_05_first_variation():
    notes, ok = [], True
    hs, errs = [], []
    for res, h_t in zip(SPHERE_LEVELS, (4e-2, 2e-2, 1e-2)):
        g = grid("sphere", res)
        rep = first_variation_check(make_variation(DS, g, np.full(g.size, LN2), 1.0, h_t), 0)
        hs.append(g.h)
        errs.append(abs(rep.fd - 7.5 * math.pi))
    good, p = _second_order(hs, errs)
    ok &= good
    notes.append(f"slice vs 7.5pi order {p:.2f} (err {errs[-1]:.1e})")
    cases = [("slice, f0 = 1 + Y21", "sphere", False), ("non-slice", "sphere", True),
             ("cylinder graph", "torus", True)]
    for label, kind, tilted in cases:
        for r in (0, 1):
            hs, errs = [], []
            for res in levels(kind):
                g = grid(kind, res)
                u = _base_for(g, kind) if tilted else np.full(g.size, LN2)
                f0 = _f0_for(g) + (0.0 if tilted else 1.0)
                rep = first_variation_check(make_variation(model_for(kind), g, u, f0), r)
                hs.append(g.h)
                errs.append(rep.error)
            good, p = _second_order(hs, errs)
            ok &= good
            notes.append(f"{label} r{r} {_order_note(errs, p)}")
    assert record(5, ok, "; ".join(notes))


def test_criterion_06_evolution_law():
    g = grid("sphere", SPHERE_LEVELS[-1])
    rep = first_variation_check(make_variation(DS, g, np.full(g.size, LN2), 1.0), 0)
    tol = 10 * g.h ** 2
    fd_val, formula_val = float(rep.dS_fd.mean()), float(rep.dS_formula.mean())
    ok = (np.abs(rep.dS_fd + 1.28).max() < tol and np.abs(rep.dS_formula + 1.28).max() < tol)
    notes = [f"slice dS1/dt {fd_val:.4f} vs formula {formula_val:.4f}"]
    for kind in ("sphere", "torus"):
        for r in (0, 1):
            hs, errs, tang = [], [], []
            for res in levels(kind):
                gg = grid(kind, res)
                spec = make_variation(model_for(kind), gg, _base_for(gg, kind), _f0_for(gg))
                rr = first_variation_check(spec, r)
                hs.append(gg.h)
                errs.append(rr.pointwise_max)
                tang.append(np.abs(rr.tangential).max())
            good, p = _second_order(hs, errs)
            ok = ok and good and min(tang) > 1e-4
            notes.append(f"{kind[0]}{r} order {p:.2f}")
    assert record(6, ok, "; ".join(notes))


def test_criterion_07_balance_of_volume():
    notes, ok = [], True
    for kind in ("sphere", "torus"):
        hs, errs = [], []
        # the discrete identity is exact in h; refine h_t with h so the stencil error drops too
        for res, h_t in zip(levels(kind), (4e-2, 2e-2, 1e-2)):
            g = grid(kind, res)
            spec = make_variation(model_for(kind), g, _base_for(g, kind), 1.0 + _f0_for(g), h_t)
            s = jacobi_series(spec, 0)
            V = s.volume
            dV = (-V[4] + 8 * V[3] - 8 * V[1] + V[0]) / (12 * spec.h_t)
            hs.append(g.h)
            errs.append(abs(dV - integrate(spec.base, spec.f0)))
        good, p = _second_order(hs, errs, floor=1e-9)
        ok &= good
        notes.append(f"{kind}: residual {errs[-1]:.1e}, order {_order_note(errs, p, 1e-9)}")
    g = grid("torus", TORUS_LEVELS[-1])
    spec = make_variation(CYL, g, np.zeros(g.size), np.sin(g.params[:, 0]))
    odd = max(abs(v) for v in jacobi_series(spec, 0).volume)
    ok &= odd < 1e-10
    notes.append(f"odd f0 on cylinder {odd:.1e}")
    assert record(7, ok, "; ".join(notes))


def test_criterion_08_second_variation():
    notes, ok = [], True
    cases = [("de Sitter 8pi", "sphere", 8 * math.pi),
             ("cylinder -2pi^2", "torus", -2 * math.pi ** 2)]
    for label, kind, exact in cases:
        hs = []
        errs = {"fd": [], "operator": [], "bilinear": []}
        for res in levels(kind):
            g = grid(kind, res)
            if kind == "sphere":
                spec = make_variation(DS, g, np.full(g.size, LN2), 1.0)
            else:
                spec = make_variation(CYL, g, np.zeros(g.size), np.sin(g.params[:, 0]))
            rep = second_variation_check(spec, 0)
            hs.append(g.h)
            errs["fd"].append(abs(rep.fd - exact))
            errs["operator"].append(abs(rep.operator_form - exact))
            errs["bilinear"].append(abs(rep.bilinear_form - exact))
        parts = []
        for key, e in errs.items():
            good, p = _second_order(hs, e)
            ok &= good
            parts.append(f"{key} {p:.2f}")
        notes.append(f"{label}: " + ", ".join(parts))
    assert record(8, ok, "; ".join(notes))


def test_criterion_09_support_identity():
    notes, ok = [], True
    worst = 0.0
    for kind, expr in (("sphere", "slice(ln2)"), ("sphere", "slice(-0.5)"),
                       ("torus", "slice(0)"), ("torus", "slice(0.7)")):
        for res in levels(kind):
            geom = geometry(kind, res, expr)
            for r in (0, 1):
                worst = max(worst, support_identity_residual(geom, r).max / geom.h ** 2)
    ok &= worst < 10
    notes.append(f"slices max residual / h^2 = {worst:.2f}")
    for expr in ("slice_plus(ln2, 0.05, harmonic(1,0))", "slice_plus(ln2, 0.1, harmonic(2,1))"):
        for r in (0, 1):
            hs, errs = [], []
            for res in SPHERE_LEVELS:
                geom = geometry("sphere", res, expr)
                hs.append(geom.h)
                errs.append(support_identity_residual(geom, r).max)
            good, p = _second_order(hs, errs)
            ok &= good
            notes.append(f"r{r} order {p:.2f}")
    assert record(9, ok, "; ".join(notes))


def test_criterion_10_theorem_sweep():
    t0 = time.perf_counter()
    rows = []
    for model, kind in ((DS, "de_sitter"), (CYL, "static_cylinder")):
        rows += theorem_probe(model, theorem_catalog(kind), resolution=(48, 96)
                              if kind == "de_sitter" else (48, 48))
    elapsed = time.perf_counter() - t0
    violations = [row.surface for row in rows
                  if row.hypothesis and row.nondegenerate and not row.is_slice
                  and not row.is_r_maximal and row.verdict == "strongly-r-stable"]
    perturbed = [row for row in rows if row.surface.startswith("slice_plus(ln2")
                 and "harmonic(1,0)" in row.surface and row.r == 0]
    witnesses = all(row.verdict == "unstable" and row.witness_value > 0 for row in perturbed)
    ok = (len(rows) >= 12 and not violations and len(perturbed) == 3 and witnesses
          and all(row.consistent for row in rows) and elapsed < 180)
    claims = sum(row.claim for row in rows)
    assert record(10, ok, f"{len(rows)} surfaces, {claims} under the hypotheses, "
                          f"{len(violations)} violations, perturbed witnesses "
                          f"{[round(row.witness_value, 3) for row in perturbed]}, {elapsed:.0f} s")


def test_criterion_11_harness_determinism(tmp_path):
    manifest = {
        "model": {"kind": "de_sitter", "n": 2},
        "grid": {"resolutions": [16, 24, 32]},
        "surface": "slice_plus(ln2, 0.05, harmonic(1,0))",
        "tasks": ["identities", "support-identity", "spectrum"],
        "r": [0, 1],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(manifest))
    texts = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        code = cli.main(["run", str(path), "--out", str(out), "--seed", "5"])
        assert code == 0
        texts.append([line for line in (out / "report.json").read_text().splitlines()
                      if '"created"' not in line and '"wall_time"' not in line])
    identical = texts[0] == texts[1]
    strict = tmp_path / "strict.json"
    strict.write_text(json.dumps(dict(manifest, tasks=["support-identity"],
                                      assertions={"slope_min": 6.0})))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(manifest, tasks=["spectra"])))
    codes = (cli.main(["run", str(strict), "--out", str(tmp_path / "s")]),
             cli.main(["run", str(bad), "--out", str(tmp_path / "b")]))
    direct = run(manifest, out_dir=str(tmp_path / "direct"), seed=5)
    ok = identical and codes == (1, 2) and direct.exit_code == 0
    assert record(11, ok, f"reports identical modulo timestamps: {identical}; "
                          f"exit codes pass/fail/invalid = 0/{codes[0]}/{codes[1]}")
