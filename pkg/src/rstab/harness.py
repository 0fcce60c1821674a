"""Experiment manifests, convergence studies, reports and grid caching.

A manifest is a JSON object (schema in ``docs/manifest.schema.json``)::

    {
      "model": {"kind": "de_sitter", "n": 2},
      "grid": {"resolutions": [[16, 32], [32, 64], [64, 128]]},
      "surface": "slice(ln2)",
      "variation": {"f0": "const(1)", "h_t": 0.01},
      "tasks": ["first-variation"],
      "r": [0],
      "seed": 0
    }

:func:`run` executes every task over every resolution and writes
``report.json``, ``convergence.csv`` (``task, r, h, error``) and one
``<task>.csv`` per task.  Convergence is judged by the least-squares
slope of ``log(error)`` against ``log(h)``; errors already below
``exact_floor`` count as exact and pass regardless of slope.

For a slice with constant ``f0 = a`` the first-variation record also
carries the closed form ``A_r'(0) = a (b_r t^{r+1} + c_r) phi(s0)^n |F|``,
``t = phi'/phi``, and judges the FD value against it.
"""

import csv
import dataclasses
import difflib
import hashlib
import io
import json
import logging
import math
import os
import platform
import time
import zipfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from math import comb

import numpy as np
import scipy

from . import curvalg
from .errors import ManifestError, PreconditionError, RStabError
from .families import f0_values, graph_values, list_families, parse_call, theorem_catalog
from .grid import MIN_RESOLUTION, FiberGrid, build_fiber_grid, sphere_grid, torus_grid
from .spacetime import make_model, slice_data
from .stability import stability_spectrum, support_identity_residual, theorem_probe
from .surface import embed_graph
from .variation import cr_constant, first_variation_check, make_variation, second_variation_check

__all__ = [
    "TASKS",
    "ExperimentManifest",
    "RunReport",
    "validate_manifest",
    "load_manifest",
    "run",
    "fit_slope",
    "cache_grid",
    "parse_gridspec",
    "list_families",
]

log = logging.getLogger("rstab")

TASKS = ("identities", "first-variation", "second-variation", "support-identity",
         "spectrum", "theorem-probe")
_GRID_TASKS = set(TASKS) - {"identities"}
_TOP_KEYS = {"model", "grid", "surface", "variation", "tasks", "r", "output", "seed",
             "assertions", "probe"}
# no upper slope bound by default: superconvergence is not a failure
_DEFAULT_ASSERT = {"slope_min": 1.7, "slope_max": None, "exact_floor": 1e-10}


# -- manifest ----------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ExperimentManifest:
    """Validated manifest; ``raw`` is the normalized JSON object."""

    model: dict
    resolutions: tuple
    surface: str
    f0: str
    h_t: float
    tasks: tuple
    r: tuple
    output: str
    seed: int
    assertions: dict
    probe: dict
    raw: dict


def _suggest(name, options):
    hint = difflib.get_close_matches(str(name), sorted(options), n=1, cutoff=0.0)
    return f"; did you mean {hint[0]!r}?" if hint else ""


def _require(cond, message):
    if not cond:
        raise ManifestError(message)


def validate_manifest(data):
    """Check a manifest object and fill defaults; raises :class:`ManifestError`."""
    _require(isinstance(data, dict), "manifest must be a JSON object")
    for key in data:
        _require(key in _TOP_KEYS, f"unknown manifest key {key!r}{_suggest(key, _TOP_KEYS)}")
    tasks = data.get("tasks")
    _require(isinstance(tasks, list) and tasks, "manifest needs a non-empty 'tasks' list")
    for t in tasks:
        _require(t in TASKS, f"unknown task {t!r}{_suggest(t, TASKS)}")
    _require(len(set(tasks)) == len(tasks), "tasks must not repeat")

    model = dict(data.get("model", {"kind": "de_sitter", "n": 2}))
    _require(isinstance(model, dict), "'model' must be an object")
    for key in model:
        _require(key in ("kind", "n", "interval"),
                 f"unknown model key {key!r}{_suggest(key, ('kind', 'n', 'interval'))}")
    kinds = ("de_sitter", "static_cylinder")
    _require(model.get("kind") in kinds,
             f"unknown model {model.get('kind')!r}{_suggest(model.get('kind'), kinds)}")
    n = model.get("n", 2)
    _require(isinstance(n, int) and not isinstance(n, bool), "model.n must be an integer")
    model["n"] = n
    if "interval" in model:
        iv = model["interval"]
        _require(isinstance(iv, list) and len(iv) == 2 and iv[0] < iv[1],
                 "model.interval must be [lo, hi] with lo < hi")
        model["interval"] = [float(iv[0]), float(iv[1])]
    try:
        make_model(model["kind"], n, tuple(model.get("interval", (-3.0, 3.0))))
    except RStabError as exc:
        raise ManifestError(str(exc)) from exc

    grid_tasks = [t for t in tasks if t in _GRID_TASKS]
    grid = data.get("grid", {})
    _require(isinstance(grid, dict), "'grid' must be an object")
    fiber = "sphere" if model["kind"] == "de_sitter" else "torus"
    if "kind" in grid:
        _require(grid["kind"] == fiber, f"grid kind {grid['kind']!r} does not match the {fiber} fiber")
    res = grid.get("resolutions", [])
    if grid_tasks:
        _require(n == 2, "grid tasks need n = 2 (two-dimensional fiber grids)")
        _require(isinstance(res, list) and res, "grid tasks need a non-empty grid.resolutions list")
    resolutions = []
    for item in res:
        pair = [item, 2 * item if fiber == "sphere" else item] if isinstance(item, int) else item
        _require(isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, int) for v in pair),
                 f"resolution {item!r} must be an integer or a pair of integers")
        _require(min(pair) >= MIN_RESOLUTION, f"resolution {item!r} is below {MIN_RESOLUTION}")
        if fiber == "sphere":
            _require(pair[1] % 2 == 0, f"sphere resolution {item!r} needs an even longitude count")
        resolutions.append(tuple(pair))

    r_list = data.get("r", [0])
    _require(isinstance(r_list, list) and r_list, "'r' must be a non-empty list")
    for r in r_list:
        _require(isinstance(r, int) and 0 <= r <= n - 1, f"r={r!r} must be an integer in [0, {n - 1}]")

    surface = data.get("surface", "slice(ln2)")
    _check_family(surface, "graph", fiber)
    variation = dict(data.get("variation", {}))
    for key in variation:
        _require(key in ("f0", "h_t"), f"unknown variation key {key!r}{_suggest(key, ('f0', 'h_t'))}")
    f0 = variation.get("f0", "const(1)")
    _check_family(f0, "f0", fiber)
    h_t = variation.get("h_t", 1e-2)
    _require(isinstance(h_t, (int, float)) and h_t > 0, "variation.h_t must be positive")

    seed = data.get("seed", 0)
    _require(isinstance(seed, int) and seed >= 0, "seed must be a non-negative integer")
    assertions = dict(_DEFAULT_ASSERT)
    for key, val in data.get("assertions", {}).items():
        _require(key in _DEFAULT_ASSERT, f"unknown assertion {key!r}{_suggest(key, _DEFAULT_ASSERT)}")
        _require(val is None or isinstance(val, (int, float)), f"assertion {key!r} must be a number or null")
        assertions[key] = None if val is None else float(val)
    probe = dict(data.get("probe", {}))
    for key in probe:
        _require(key in ("family", "resolution"),
                 f"unknown probe key {key!r}{_suggest(key, ('family', 'resolution'))}")
    for expr in probe.get("family", []):
        _check_family(expr[0] if isinstance(expr, list) else expr, "graph", fiber)
    output = data.get("output", "rstab-out")
    _require(isinstance(output, str), "output must be a path string")

    raw = {"model": model, "grid": {"resolutions": [list(p) for p in resolutions]},
           "surface": surface, "variation": {"f0": f0, "h_t": float(h_t)}, "tasks": list(tasks),
           "r": list(r_list), "output": output, "seed": seed, "assertions": assertions,
           "probe": probe}
    return ExperimentManifest(model, tuple(resolutions), surface, f0, float(h_t), tuple(tasks),
                              tuple(r_list), output, seed, assertions, probe, raw)


def _check_family(expr, kind, fiber):
    cat = list_families()[kind]
    name, args = parse_call(expr)
    allowed = [k for k in cat if k not in ("harmonic", "fourier")] if kind == "graph" else list(cat)
    _require(name in allowed, f"unknown {kind} family {name!r}{_suggest(name, cat)}")
    _require(len(args) == len(cat[name]["params"]),
             f"{kind} family {name!r} takes ({', '.join(cat[name]['params'])})")
    modes = [args[2]] if name == "slice_plus" else ([f"{name}(0,0)"] if name in ("harmonic", "fourier") else [])
    for mode in modes:
        mname, _ = parse_call(mode)
        want = "harmonic" if fiber == "sphere" else "fourier"
        _require(mname == want, f"mode {mode!r} does not live on the {fiber} fiber; use {want}(..)")


def load_manifest(path):
    """Read and validate a manifest file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    return validate_manifest(data)


# -- convergence -------------------------------------------------------------

def fit_slope(h, err):
    """Least-squares slope of ``log(err)`` against ``log(h)``; NaN if undefined."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    ok = err > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(h[ok]), np.log(err[ok]), 1)[0])


def _judge(h, err, asserts):
    """Status of one convergence series and its slope."""
    slope = fit_slope(h, err)
    if err[-1] < asserts["exact_floor"]:
        return "pass", slope, "exact to floor"
    hi = asserts["slope_max"]
    if slope >= asserts["slope_min"] and (hi is None or slope <= hi):
        return "pass", slope, "second-order"
    return "fail", slope, f"slope {slope:.3f} outside [{asserts['slope_min']}, {hi}]"


# -- tasks -------------------------------------------------------------------

class _Context:
    def __init__(self, manifest, jobs):
        m = manifest.model
        self.manifest = manifest
        self.model = make_model(m["kind"], m["n"], tuple(m.get("interval", (-3.0, 3.0))))
        self.jobs = max(1, int(jobs))

    def map(self, fn, items):
        if self.jobs == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as ex:
            return list(ex.map(fn, items))  # results keep input order

    def variation(self, res):
        grid = build_fiber_grid(self.model, res)
        u = graph_values(grid, self.manifest.surface)
        return make_variation(self.model, grid, u, f0_values(grid, self.manifest.f0),
                              self.manifest.h_t)

    def geometry(self, res):
        grid = build_fiber_grid(self.model, res)
        return embed_graph(self.model, grid, graph_values(grid, self.manifest.surface))


def _series_record(ctx, rows, keys):
    """Judge every ``(r, key)`` series in ``rows`` (one row per resolution and r)."""
    asserts = ctx.manifest.assertions
    results, status, conv = [], "pass", []
    for r in ctx.manifest.r:
        sub = [row for row in rows if row["r"] == r]
        h = [row["h"] for row in sub]
        for key in keys:
            err = [row[key] for row in sub]
            st, slope, note = _judge(h, np.array(err), asserts)
            results.append({"r": r, "quantity": key, "h": h, "error": err,
                            "slope": slope, "status": st, "note": note})
            conv += [(key, r, hh, ee) for hh, ee in zip(h, err)]
            if st != "pass":
                status = "fail"
    return status, results, conv


def _task_identities(ctx):
    rng = np.random.default_rng(ctx.manifest.seed)
    worst_rel, worst_trace, count = 0.0, 0.0, 0
    for n in range(2, 7):
        for _ in range(20):
            a = rng.standard_normal((n, n))
            sample = curvalg.ShapeSample.from_matrix(0.5 * (a + a.T))
            P = curvalg.newton_seq(sample).P
            scale = max(1.0, np.abs(P).max())
            for r in range(n + 1):
                R = curvalg.newton_reilly(sample, r)
                worst_rel = max(worst_rel, float(np.abs(R - P[r]).max() / scale))
            res = curvalg.trace_identity_residuals(sample)
            worst_trace = max(worst_trace, res.max / (1 + sample.norm ** n))
            count += 1
    ok = worst_rel < 1e-9 and worst_trace < 1e-9
    rows = [{"samples": count, "newton_rel_error": worst_rel, "trace_residual": worst_trace}]
    return ("pass" if ok else "fail"), {"samples": count, "newton_rel_error": worst_rel,
                                        "trace_residual": worst_trace}, [], rows


def _slice_first_variation(ctx, grid, r):
    """Closed-form ``A_r'(0)`` for a slice with constant ``f0``, else ``None``."""
    gname, gargs = parse_call(ctx.manifest.surface)
    fname, fargs = parse_call(ctx.manifest.f0)
    if gname != "slice" or fname != "const":
        return None
    n = ctx.model.n
    sd = slice_data(ctx.model, float(graph_values(grid, ctx.manifest.surface)[0]))
    a = float(f0_values(grid, ctx.manifest.f0)[0])
    b = (n - r) * comb(n, r)
    return a * (b * sd.H[r + 1] + cr_constant(n, r, ctx.model.c)) * sd.area_factor * grid.fiber_volume


def _task_first_variation(ctx):
    rows = []
    for r in ctx.manifest.r:
        def one(res, r=r):
            spec = ctx.variation(res)
            rep = first_variation_check(spec, r)
            row = {"r": r, "resolution": "x".join(map(str, res)), "h": rep.h,
                   "fd": rep.fd, "formula": rep.formula, "error": rep.error,
                   "pointwise": rep.pointwise_max}
            exact = _slice_first_variation(ctx, spec.grid, r)
            if exact is not None:
                row.update(analytic=exact, analytic_error=abs(rep.fd - exact))
            return row
        rows += ctx.map(one, ctx.manifest.resolutions)
    keys = ["error", "pointwise"] + (["analytic_error"] if "analytic" in rows[0] else [])
    status, results, conv = _series_record(ctx, rows, keys)
    return status, {"series": results}, conv, rows


def _task_second_variation(ctx):
    rows = []
    for r in ctx.manifest.r:
        def one(res, r=r):
            spec = ctx.variation(res)
            rep = second_variation_check(spec, r)
            return {"r": r, "resolution": "x".join(map(str, res)), "h": rep.h, "fd": rep.fd,
                    "operator_form": rep.operator_form, "bilinear_form": rep.bilinear_form,
                    "error": rep.error, "operator_gap": abs(rep.operator_form - rep.bilinear_form)}
        rows += ctx.map(one, ctx.manifest.resolutions)
    status, results, conv = _series_record(ctx, rows, ["error", "operator_gap"])
    return status, {"series": results}, conv, rows


def _task_support_identity(ctx):
    rows, fields = [], {}
    for r in ctx.manifest.r:
        def one(res, r=r):
            geom = ctx.geometry(res)
            rep = support_identity_residual(geom, r)
            return ({"r": r, "resolution": "x".join(map(str, res)), "h": geom.h, "error": rep.max,
                     "npsi_fd": rep.npsi_fd_residual}, rep.residual)
        out = ctx.map(one, ctx.manifest.resolutions)
        rows += [o[0] for o in out]
        fields[r] = out[-1][1]
    status, results, conv = _series_record(ctx, rows, ["error"])
    return status, {"series": results}, conv, rows, fields


def _task_spectrum(ctx):
    rows, status = [], "pass"
    for r in ctx.manifest.r:
        def one(res, r=r):
            geom = ctx.geometry(res)
            s = stability_spectrum(geom, r)
            return {"r": r, "resolution": "x".join(map(str, res)), "h": geom.h, "top": s.top,
                    "second": float(s.eigenvalues[1]), "tol": s.tol, "verdict": s.verdict,
                    "witness_value": s.witness_value, "symmetry": s.symmetry}
        rows += ctx.map(one, ctx.manifest.resolutions)
    for row in rows:
        bad_witness = row["verdict"] == "unstable" and not row["witness_value"] > 0
        if bad_witness or row["symmetry"] > 1e-10:
            status = "fail"
    return status, {"verdicts": [{k: row[k] for k in ("r", "resolution", "top", "verdict")}
                                 for row in rows]}, [], rows


def _task_theorem_probe(ctx):
    probe = ctx.manifest.probe
    kind = ctx.manifest.model["kind"]
    fam = probe.get("family") or [list(x) for x in theorem_catalog(kind)]
    family = [tuple(x) if isinstance(x, list) else x for x in fam]
    default = ctx.manifest.resolutions[-1] if ctx.manifest.resolutions else (48, 96)
    res = tuple(probe.get("resolution", default))
    r = None if all(isinstance(x, tuple) for x in family) else ctx.manifest.r[0]
    probe_rows = theorem_probe(ctx.model, family, r, res)
    rows = [row.as_dict() for row in probe_rows]
    status = "pass" if all(row["consistent"] for row in rows) else "fail"
    return status, {"surfaces": len(rows), "claims": sum(row["claim"] for row in rows),
                    "inconsistent": [row["surface"] for row in rows if not row["consistent"]]}, [], rows


_RUNNERS = {
    "identities": _task_identities,
    "first-variation": _task_first_variation,
    "second-variation": _task_second_variation,
    "support-identity": _task_support_identity,
    "spectrum": _task_spectrum,
    "theorem-probe": _task_theorem_probe,
}


# -- reports -----------------------------------------------------------------

@dataclasses.dataclass
class RunReport:
    """Outcome of :func:`run`; ``records`` holds one entry per manifest task."""

    manifest: dict
    records: list
    environment: dict
    created: str
    out_dir: str

    @property
    def status(self):
        return "pass" if all(rec["status"] == "pass" for rec in self.records) else "fail"

    @property
    def exit_code(self):
        return 0 if self.status == "pass" else 1

    def to_json(self):
        doc = {"created": self.created, "environment": self.environment,
               "manifest": self.manifest, "records": self.records, "status": self.status}
        return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _environment():
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "platform": platform.system()}


def _write_csv(path, rows):
    if not rows:
        return
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in keys])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def run(manifest, out_dir=None, seed=None, jobs=1):
    """Execute a manifest (path, dict or :class:`ExperimentManifest`) and write its outputs."""
    if isinstance(manifest, (str, os.PathLike)):
        manifest = load_manifest(manifest)
    elif isinstance(manifest, dict):
        manifest = validate_manifest(manifest)
    if seed is not None:
        manifest = dataclasses.replace(manifest, seed=int(seed),
                                       raw={**manifest.raw, "seed": int(seed)})
    out = out_dir or manifest.output
    os.makedirs(out, exist_ok=True)
    ctx = _Context(manifest, jobs)
    records, convergence = [], []
    for task in manifest.tasks:
        t0 = time.perf_counter()
        record = {"task": task}
        try:
            result = _RUNNERS[task](ctx)
            status, summary, conv, rows = result[:4]
            record.update(status=status, result=summary)
            convergence += [(task if q == "error" else f"{task}:{q}", r, h, e)
                            for q, r, h, e in conv]
            _write_csv(os.path.join(out, f"{task}.csv"), rows)
            if len(result) > 4:
                for r, field in result[4].items():
                    _write_csv(os.path.join(out, f"{task}_r{r}_nodes.csv"),
                               [{"node": k, "residual": float(v)} for k, v in enumerate(field)])
        except (RStabError, np.linalg.LinAlgError, FloatingPointError) as exc:
            kind = "precondition" if isinstance(exc, PreconditionError) else type(exc).__name__
            record.update(status="error", message=f"{kind}: {exc}")
        record["wall_time"] = round(time.perf_counter() - t0, 3)
        records.append(record)
    _write_csv(os.path.join(out, "convergence.csv"),
               [{"task": t, "r": r, "h": h, "error": e} for t, r, h, e in convergence])
    report = RunReport(manifest.raw, records, _environment(),
                       datetime.now(timezone.utc).isoformat(timespec="seconds"), out)
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(report.to_json())
    return report


# -- grid cache --------------------------------------------------------------

def parse_gridspec(text):
    """Parse ``"sphere:64x128"``, ``"torus:32"`` or a JSON object into a spec dict."""
    text = str(text).strip()
    if text.startswith("{"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"bad grid spec JSON: {exc}") from exc
    else:
        kind, _, res = text.partition(":")
        try:
            spec = {"kind": kind, "resolution": [int(v) for v in res.lower().split("x") if v]}
        except ValueError as exc:
            raise ManifestError(f"bad grid spec {text!r}; expected kind:N1xN2") from exc
    kind = spec.get("kind")
    _require(kind in ("sphere", "torus"), f"unknown grid kind {kind!r}{_suggest(kind, ('sphere', 'torus'))}")
    res = spec.get("resolution")
    _require(isinstance(res, list) and 1 <= len(res) <= 2 and all(isinstance(v, int) for v in res),
             "grid resolution must be one or two integers")
    if len(res) == 1:
        res = [res[0], 2 * res[0] if kind == "sphere" else res[0]]
    _require(min(res) >= MIN_RESOLUTION, f"grid resolution must be >= {MIN_RESOLUTION}")
    return {"kind": kind, "resolution": res}


def _spec_key(spec):
    canon = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _build(spec):
    maker = sphere_grid if spec["kind"] == "sphere" else torus_grid
    return maker(*spec["resolution"])


_CACHED = ("params", "point", "weights")


def _digest(arrays):
    h = hashlib.sha256()
    for name in _CACHED:
        h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()


def cache_grid(spec, cache_dir):
    """Persist a grid's node coordinates and weights under its content hash.

    Returns ``(path, grid)``.  An unreadable or inconsistent cache file is
    rebuilt with a logged warning.
    """
    if isinstance(spec, str):
        spec = parse_gridspec(spec)
    elif isinstance(spec, FiberGrid):
        spec = spec.spec()
    else:
        spec = parse_gridspec(json.dumps(spec))
    key = _spec_key(spec)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"grid-{key[:16]}.npz")
    grid = _build(spec)
    if os.path.exists(path):
        try:
            with np.load(path, allow_pickle=False) as data:
                stored = {k: data[k] for k in _CACHED}
                meta = json.loads(str(data["meta"]))
            if meta.get("key") != key or meta.get("digest") != _digest(stored):
                raise ValueError("content hash mismatch")
            if not all(np.array_equal(stored[k], getattr(grid, k)) for k in _CACHED):
                raise ValueError("cached nodes differ from a fresh build")
            return path, grid
        except (OSError, ValueError, KeyError, zipfile.BadZipFile, EOFError) as exc:
            log.warning("grid cache %s is corrupt (%s); rebuilding", path, exc)
    arrays = {k: getattr(grid, k) for k in _CACHED}
    meta = json.dumps({"key": key, "spec": spec, "digest": _digest(arrays)}, sort_keys=True)
    buf = io.BytesIO()
    np.savez(buf, meta=np.array(meta), **arrays)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)
    return path, grid


def load_cached_grid(path):
    """Arrays stored in a cache file, as a dict."""
    with np.load(path, allow_pickle=False) as data:
        out = {k: data[k] for k in _CACHED}
        out["meta"] = json.loads(str(data["meta"]))
    return out
