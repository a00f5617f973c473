"""JSON and CSV formats.

Matrices are objects ``{"rows", "cols", "field", "data"}`` with row-major
``data``; complex entries are ``[re, im]`` pairs.  Subspaces, systems,
geometric systems and couplings nest matrices under named keys.  Parse
failures raise :class:`FormatError` with the offending field path.
Trajectories are written as CSV, one row per time step.
"""

import csv
import io as _io
import json
import math
import numbers
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import FormatError
from .geometric import GeometricPH
from .interconnect import CouplingRelation
from .subspace import from_image, from_kernel
from .systems import DescriptorSystem, StandardSystem

__all__ = ["matrix_to_json", "matrix_from_json", "subspace_to_json",
           "subspace_from_json", "system_to_json", "system_from_json",
           "geometric_to_json", "geometric_from_json", "CouplingSpec",
           "coupling_from_json", "coupling_to_json", "weight_from_json",
           "load_json", "dumps", "trajectory_csv", "read_inputs_csv"]

COUPLING_MODES = ("general", "redheffer", "feedback")


# -- matrices ----------------------------------------------------------------

def matrix_to_json(a):
    a = np.atleast_2d(np.asarray(a))
    cplx = np.iscomplexobj(a)
    if cplx:
        data = [[[float(z.real), float(z.imag)] for z in row] for row in a]
    else:
        data = [[float(z) for z in row] for row in a]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]),
            "field": "complex" if cplx else "real", "data": data}


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, numbers.Real):
        raise FormatError(f"{where}: expected a number, got {x!r}", where)
    v = float(x)
    if not math.isfinite(v):
        raise FormatError(f"{where}: non-finite value", where)
    return v


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object", where)
    if key not in obj:
        raise FormatError(f"{where}.{key}: missing", f"{where}.{key}")
    return obj[key]


def _count(obj, key, where):
    v = _require(obj, key, where)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise FormatError(f"{where}.{key}: expected a non-negative integer", f"{where}.{key}")
    return v


def matrix_from_json(obj, where="matrix"):
    rows = _count(obj, "rows", where)
    cols = _count(obj, "cols", where)
    field = _require(obj, "field", where)
    if field not in ("real", "complex"):
        raise FormatError(f"{where}.field: must be 'real' or 'complex', got {field!r}",
                          f"{where}.field")
    data = _require(obj, "data", where)
    if not isinstance(data, list) or len(data) != rows:
        raise FormatError(f"{where}.data: expected {rows} rows", f"{where}.data")
    out = np.zeros((rows, cols), dtype=complex if field == "complex" else float)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise FormatError(f"{where}.data[{i}]: expected {cols} entries",
                              f"{where}.data[{i}]")
        for j, x in enumerate(row):
            at = f"{where}.data[{i}][{j}]"
            if field == "complex" and isinstance(x, list):
                if len(x) != 2:
                    raise FormatError(f"{at}: complex entries are [re, im]", at)
                out[i, j] = complex(_number(x[0], at), _number(x[1], at))
            else:
                out[i, j] = _number(x, at)
    return out


# -- subspaces ---------------------------------------------------------------

def subspace_to_json(M):
    return {"p": M.p, "q": M.q, "P": matrix_to_json(M.P), "Q": matrix_to_json(M.Q)}


def subspace_from_json(obj, where="subspace"):
    p = _count(obj, "p", where)
    q = _count(obj, "q", where)
    if "kernel" in obj and obj["kernel"] is not None:
        ker = obj["kernel"]
        K1 = matrix_from_json(_require(ker, "K1", f"{where}.kernel"), f"{where}.kernel.K1")
        K2 = matrix_from_json(_require(ker, "K2", f"{where}.kernel"), f"{where}.kernel.K2")
        if K1.shape[1] != p or K2.shape[1] != q or K1.shape[0] != K2.shape[0]:
            raise FormatError(f"{where}.kernel: K1 must be r x {p} and K2 r x {q}",
                              f"{where}.kernel")
        return from_kernel(K1, K2)
    P = matrix_from_json(_require(obj, "P", where), f"{where}.P")
    Q = matrix_from_json(_require(obj, "Q", where), f"{where}.Q")
    if P.shape[0] != p or Q.shape[0] != q or P.shape[1] != Q.shape[1]:
        raise FormatError(f"{where}: P must be {p} x d and Q {q} x d with equal d",
                          f"{where}.P")
    return from_image(P, Q)


# -- systems -----------------------------------------------------------------

def system_to_json(sys, blocks=None):
    E = getattr(sys, "E", None)
    out = {"E": None if E is None else matrix_to_json(E)}
    for name in "ABCD":
        out[name] = matrix_to_json(getattr(sys, name))
    out["partition"] = None if sys.m1 is None else {"m1": int(sys.m1)}
    if blocks is not None:
        out["blocks"] = _manifest(blocks)
    return out


def _manifest(blocks):
    """Slices become ``[start, stop]``; nested dicts are kept."""
    if isinstance(blocks, slice):
        return [int(blocks.start), int(blocks.stop)]
    if isinstance(blocks, dict):
        return {str(k): _manifest(v) for k, v in blocks.items()}
    return [int(v) for v in blocks]


def system_from_json(obj, where="system"):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object", where)
    mats = {k: matrix_from_json(_require(obj, k, where), f"{where}.{k}") for k in "ABCD"}
    part = obj.get("partition")
    m1 = None if part is None else _count(part, "m1", f"{where}.partition")
    E = obj.get("E")
    if E is None:
        return StandardSystem(mats["A"], mats["B"], mats["C"], mats["D"], m1)
    return DescriptorSystem(matrix_from_json(E, f"{where}.E"), mats["A"], mats["B"],
                            mats["C"], mats["D"], m1)


def weight_from_json(obj, where="weight"):
    """A storage weight: a Matrix object, or ``{"X": Matrix}``."""
    if isinstance(obj, dict) and "X" in obj:
        return matrix_from_json(obj["X"], f"{where}.X")
    return matrix_from_json(obj, where)


# -- geometric systems -------------------------------------------------------

def geometric_to_json(g):
    return {"n": g.n, "r": g.r, "m": g.m, "N": subspace_to_json(g.N),
            "C": subspace_to_json(g.C)}


def geometric_from_json(obj, where="geometric"):
    n, r, m = (_count(obj, k, where) for k in ("n", "r", "m"))
    N = subspace_from_json(_require(obj, "N", where), f"{where}.N")
    C = subspace_from_json(_require(obj, "C", where), f"{where}.C")
    return GeometricPH(n, r, m, N, C)


# -- couplings ---------------------------------------------------------------

@dataclass(frozen=True)
class CouplingSpec:
    """Interconnection request: a mode and, for ``general``, the kernel."""

    mode: str
    relation: Optional[CouplingRelation] = None


def coupling_from_json(obj, where="coupling"):
    mode = _require(obj, "mode", where)
    if mode not in COUPLING_MODES:
        raise FormatError(f"{where}.mode: must be one of {COUPLING_MODES}, got {mode!r}",
                          f"{where}.mode")
    ker = obj.get("kernel")
    if ker is None:
        if mode == "general":
            raise FormatError(f"{where}.kernel: required for mode 'general'",
                              f"{where}.kernel")
        return CouplingSpec(mode)
    blocks = {k: matrix_from_json(_require(ker, k, f"{where}.kernel"), f"{where}.kernel.{k}")
              for k in ("M11", "M12", "M21", "M22")}
    return CouplingSpec(mode, CouplingRelation(mode=mode, **blocks))


def coupling_to_json(spec):
    R = spec.relation
    ker = None if R is None else {k: matrix_to_json(getattr(R, k))
                                  for k in ("M11", "M12", "M21", "M22")}
    return {"mode": spec.mode, "kernel": ker}


# -- files -------------------------------------------------------------------

def load_json(path):
    """Read a JSON document; malformed input raises FormatError."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})",
                          str(path)) from exc


def dumps(obj):
    """Deterministic JSON text (sorted keys, shortest float repr)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- CSV ---------------------------------------------------------------------

def _columns(prefix, width, cplx):
    names = []
    for i in range(1, width + 1):
        if cplx:
            names += [f"re({prefix}_{i})", f"im({prefix}_{i})"]
        else:
            names.append(f"{prefix}_{i}")
    return names


def _cells(v, cplx):
    if cplx:
        return [repr(float(c)) for z in v for c in (z.real, z.imag)]
    return [repr(float(z)) for z in np.real(v)]


def trajectory_csv(traj, margins=None):
    """CSV text with columns ``k, x_*, u_*, y_*, residual, margin``.

    Row ``k`` holds ``x[k]``, ``u[k]``, ``y[k]`` and the step residual.
    A final row carries ``x[N]`` with the remaining cells empty.  Complex
    signals are split into ``re(..)``/``im(..)`` columns.
    """
    N = traj.steps
    cplx = any(np.iscomplexobj(a) for a in (traj.states, traj.inputs, traj.outputs))
    n, m, p = traj.states.shape[1], traj.inputs.shape[1], traj.outputs.shape[1]
    header = (["k"] + _columns("x", n, cplx) + _columns("u", m, cplx)
              + _columns("y", p, cplx) + ["residual", "margin"])
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for k in range(N):
        margin = "" if margins is None else repr(float(margins[k]))
        w.writerow([str(k)] + _cells(traj.states[k], cplx) + _cells(traj.inputs[k], cplx)
                   + _cells(traj.outputs[k], cplx)
                   + [repr(float(traj.residuals[k])), margin])
    width = (2 if cplx else 1) * (m + p) + 2
    w.writerow([str(N)] + _cells(traj.states[N], cplx) + [""] * width)
    return buf.getvalue()


def read_inputs_csv(path, m):
    """Read an input sequence of width `m`.

    Accepts a bare numeric table, or a table with a header row.  With a
    header, ``u_*`` columns are used when present (so a trajectory CSV can
    be fed back), a ``k`` column is ignored, and ``re(..)``/``im(..)``
    pairs are combined into complex values.  Rows with empty input cells
    are skipped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        return np.zeros((0, m))
    header = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if header is None:
        cols = list(range(len(rows[0])))
        names = [f"u_{i + 1}" for i in cols]
    else:
        names = header
        wanted = [i for i, h in enumerate(header)
                  if h.startswith("u_") or h.startswith("re(u_") or h.startswith("im(u_")]
        cols = wanted or [i for i, h in enumerate(header) if h != "k"]
    cplx = any(names[i].startswith(("re(", "im(")) for i in cols)
    values = []
    for ln, row in enumerate(rows, start=2 if header else 1):
        cells = [row[i].strip() if i < len(row) else "" for i in cols]
        if all(c == "" for c in cells):
            continue
        try:
            nums = [float(c) for c in cells]
        except ValueError as exc:
            raise FormatError(f"{path}: line {ln}: {exc}", f"{path}:{ln}") from exc
        if cplx:
            nums = [complex(a, b) for a, b in zip(nums[0::2], nums[1::2])]
        values.append(nums)
    if not values:
        return np.zeros((0, m))
    u = np.array(values, dtype=complex if cplx else float)
    if u.shape[1] != m:
        raise FormatError(f"{path}: expected {m} input columns, found {u.shape[1]}", str(path))
    return u
