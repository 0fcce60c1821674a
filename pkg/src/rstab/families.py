"""Named analytic families of graphs and initial normal speeds.

Families are written as call strings, ``"slice(0.693)"`` or
``"slice_plus(0.693, 0.05, harmonic(1,0))"``, so manifests can name them
compactly.  :func:`parse_call` turns such a string into ``(name, args)``;
nested calls (the ``mode`` of ``slice_plus``) stay strings.

Spherical harmonics are the real orthonormal ones on the unit sphere,

* ``m > 0``: ``sqrt(2) N_lm P_l^m(cos theta) cos(m phi)``,
* ``m = 0``: ``N_l0 P_l(cos theta)``,
* ``m < 0``: ``sqrt(2) N_l|m| P_l^|m|(cos theta) sin(|m| phi)``,

with ``N_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!)`` and no Condon-Shortley
phase.  Fourier modes on the torus are ``cos(kx x + ky y)``.
"""

import csv
import difflib
import math
import re

import numpy as np
from scipy.special import lpmv

from .errors import DomainError, ManifestError

__all__ = [
    "parse_call",
    "real_harmonic",
    "fourier_mode",
    "mode_values",
    "graph_values",
    "f0_values",
    "load_graph_csv",
    "list_families",
    "theorem_catalog",
    "GRAPH_FAMILIES",
    "F0_FAMILIES",
]

GRAPH_FAMILIES = {
    "slice": {"params": ["s0"], "doc": "u = s0"},
    "slice_plus": {"params": ["s0", "eps", "mode"],
                   "doc": "u = s0 + eps * mode, mode = harmonic(l,m) or fourier(kx,ky)"},
    "harmonic": {"params": ["l", "m"], "doc": "real orthonormal spherical harmonic (mode only)"},
    "fourier": {"params": ["kx", "ky"], "doc": "cos(kx x + ky y) on the torus (mode only)"},
    "csv": {"params": ["path"], "doc": "node index, u value per row"},
}

F0_FAMILIES = {
    "const": {"params": ["a"], "doc": "f0 = a"},
    "harmonic": {"params": ["l", "m", "a"], "doc": "f0 = a * Y_lm"},
    "fourier": {"params": ["kx", "ky", "a"], "doc": "f0 = a * cos(kx x + ky y)"},
}

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")


def _nearest(name, options):
    match = difflib.get_close_matches(name, list(options), n=1, cutoff=0.0)
    return match[0] if match else None


def _unknown(kind, name, options):
    hint = _nearest(name, options)
    extra = f"; did you mean {hint!r}?" if hint else ""
    return ManifestError(f"unknown {kind} family {name!r}{extra}")


def _split_args(body):
    args, depth, cur = [], 0, []
    for ch in body:
        if ch == "," and depth == 0:
            args.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    tail = "".join(cur).strip()
    if tail or args:
        args.append(tail)
    return args


def _number(text):
    text = text.strip()
    if text in ("ln2", "ln(2)"):
        return math.log(2.0)
    try:
        return float(text)
    except ValueError as exc:
        raise ManifestError(f"expected a number, got {text!r}") from exc


def parse_call(text):
    """Split ``"name(a, b, ...)"`` into ``(name, [args])``; args stay strings."""
    m = _CALL.match(str(text))
    if not m:
        raise ManifestError(f"malformed family expression {text!r}")
    return m.group(1), _split_args(m.group(2))


def _check_arity(kind, name, args, table):
    want = table[name]["params"]
    if len(args) != len(want):
        raise ManifestError(f"{kind} family {name!r} takes ({', '.join(want)}), got {len(args)} argument(s)")


def real_harmonic(l, m, theta, phi):
    """Real orthonormal spherical harmonic ``Y_lm`` at ``(theta, phi)``."""
    l, m = int(l), int(m)
    if l < 0 or abs(m) > l:
        raise DomainError(f"need 0 <= |m| <= l, got l={l}, m={m}")
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
    # scipy includes the Condon-Shortley phase; remove it
    P = (-1) ** am * lpmv(am, l, np.cos(theta))
    if m == 0:
        return norm * P
    trig = np.cos(am * phi) if m > 0 else np.sin(am * phi)
    return math.sqrt(2.0) * norm * P * trig


def fourier_mode(kx, ky, x, y):
    """``cos(kx x + ky y)``; integer wave numbers keep it periodic."""
    return np.cos(kx * x + ky * y)


def mode_values(grid, mode):
    """Node values of a ``harmonic(l,m)`` or ``fourier(kx,ky)`` mode."""
    name, args = parse_call(mode)
    if name == "harmonic":
        if grid.kind != "sphere":
            raise ManifestError("harmonic modes need a sphere fiber")
        l, m = (int(_number(a)) for a in args)
        return real_harmonic(l, m, grid.params[:, 0], grid.params[:, 1])
    if name == "fourier":
        if grid.kind != "torus":
            raise ManifestError("fourier modes need a torus fiber")
        kx, ky = (int(_number(a)) for a in args)
        return fourier_mode(kx, ky, grid.params[:, 0], grid.params[:, 1])
    raise _unknown("mode", name, ["harmonic", "fourier"])


def load_graph_csv(path, grid):
    """Read ``node index, u value`` rows; every node must appear exactly once."""
    u = np.full(grid.size, np.nan)
    with open(path, newline="") as fh:
        first = True
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                k, val = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                if first:
                    first = False
                    continue  # header line
                raise DomainError(f"malformed row {row!r} in {path}") from None
            first = False
            if not 0 <= k < grid.size:
                raise DomainError(f"node index {k} outside grid of {grid.size} nodes")
            if not np.isnan(u[k]):
                raise DomainError(f"node {k} listed twice in {path}")
            u[k] = val
    missing = np.flatnonzero(np.isnan(u))
    if missing.size:
        raise DomainError(f"{missing.size} node(s) missing from {path}")
    return u


def graph_values(grid, spec):
    """Node values of a graph family expression."""
    name, args = parse_call(spec)
    if name not in GRAPH_FAMILIES or name in ("harmonic", "fourier"):
        raise _unknown("graph", name, ["slice", "slice_plus", "csv"])
    _check_arity("graph", name, args, GRAPH_FAMILIES)
    if name == "slice":
        return np.full(grid.size, _number(args[0]))
    if name == "slice_plus":
        return _number(args[0]) + _number(args[1]) * mode_values(grid, args[2])
    return load_graph_csv(args[0].strip().strip("'\""), grid)


def f0_values(grid, spec):
    """Node values of an initial normal speed ``f0``."""
    name, args = parse_call(spec)
    if name not in F0_FAMILIES:
        raise _unknown("f0", name, F0_FAMILIES)
    _check_arity("f0", name, args, F0_FAMILIES)
    if name == "const":
        return np.full(grid.size, _number(args[0]))
    a = _number(args[-1])
    mode = f"{name}({args[0]},{args[1]})"
    return a * mode_values(grid, mode)


def theorem_catalog(model_kind):
    """Shipped surfaces for the Theorem-3 sweep on one model.

    Entries are ``(graph expression, r)`` pairs.
    """
    if model_kind == "de_sitter":
        out = [("slice(ln2)", 0), ("slice(ln2)", 1), ("slice(0)", 1), ("slice(-0.5)", 0)]
        out += [(f"slice_plus(ln2, {e}, harmonic(1,0))", 0) for e in (0.02, 0.05, 0.1)]
        out += [("slice_plus(ln2, 0.05, harmonic(2,1))", 0),
                ("slice_plus(ln2, 0.05, harmonic(1,0))", 1),
                ("slice_plus(0.3, 0.1, harmonic(2,0))", 1),
                ("slice_plus(0, 0.05, harmonic(1,1))", 1)]
        return out
    if model_kind == "static_cylinder":
        return [("slice(0)", 0), ("slice(0)", 1),
                ("slice_plus(0, 0.1, fourier(1,0))", 0),
                ("slice_plus(0, 0.1, fourier(1,1))", 1)]
    raise ManifestError(f"no catalog for model {model_kind!r}")


def list_families():
    """Machine-readable catalog of graph and variation families."""
    return {
        "graph": {k: dict(v) for k, v in GRAPH_FAMILIES.items()},
        "f0": {k: dict(v) for k, v in F0_FAMILIES.items()},
        "models": ["de_sitter", "static_cylinder"],
        "tasks": ["identities", "first-variation", "second-variation",
                  "support-identity", "spectrum", "theorem-probe"],
        "catalog": {kind: [{"graph": g, "r": r} for g, r in theorem_catalog(kind)]
                    for kind in ("de_sitter", "static_cylinder")},
    }
