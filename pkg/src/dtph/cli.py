"""Command-line front end.

Subcommands read subspace, system and coupling files in the JSON formats
of :mod:`dtph.io` and write JSON or CSV results.  Exit codes:

    0  success, every requested verification passed
    1  a verification failed (not contractive, not pH, negative margin)
    2  malformed input (invalid JSON, schema violation, bad flag value)
    3  dimension mismatch between otherwise well-formed objects
    4  simulation step failure (non-unique or inconsistent step)
    5  coupling error (non-contractive, singular, mismatched ports)
    6  unmet precondition (index > 1, inconsistent x0, not monotone,
       not Lagrangian, not pH for dilation) or no storage weight found
"""

import argparse
import os
import sys as _sys

import numpy as np

from . import io
from .errors import (CouplingError, DimensionError, DTPHError, FormatError,
                     IndexTooHigh, InconsistentInitialState, NotFound,
                     NotLagrangian, NotMonotone, NotPositiveDefinite,
                     NotScatteringPH, SingularPencil, StepError)
from .geometric import dilate, discretize_dh, simulate as simulate_geometric
from .interconnect import (closed_loop, compose_storage, general_interconnect,
                           redheffer_coupling, redheffer_reduce)
from .linalg import DEFAULT_TOL, rank_and_bases
from .subspace import cayley, cayley_inverse, classify
from .systems import (DescriptorSystem, StandardSystem, check_dissipation,
                      find_storage_weight, is_scattering_ph, simulate_descriptor,
                      simulate_standard)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DIM, EXIT_STEP, EXIT_COUPLING, EXIT_PRECOND = range(7)


class UsageError(FormatError):
    """Invalid flag value or flag combination."""


# -- helpers -----------------------------------------------------------------

def _tolerances(args):
    value = args.tol
    if value is None:
        env = os.environ.get("DTPH_TOL")
        if env:
            try:
                value = float(env)
            except ValueError:
                raise UsageError(f"DTPH_TOL: not a number: {env!r}", "DTPH_TOL")
    if value is None:
        return DEFAULT_TOL
    if not value > 0:
        raise UsageError("--tol must be positive", "--tol")
    return DEFAULT_TOL.with_(psd_atol=value)


def _emit(args, text):
    """Write `text` to --output, or to stdout when no path is given."""
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def _fmt(v):
    return f"{v:.6e}"


def _load_system(path, where="system"):
    return io.system_from_json(io.load_json(path), where)


def _load_weight(path):
    return io.weight_from_json(io.load_json(path), "weight")


def _parse_vector(text, n, name):
    if text is None:
        return None
    try:
        vals = [complex(t.replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers", name)
    v = np.array(vals)
    if not np.any(v.imag):
        v = v.real.copy()
    if v.shape != (n,):
        raise DimensionError(f"{name} must have {n} entries, got {v.size}")
    return v


def _inputs(args, m, cplx):
    if args.inputs:
        return io.read_inputs_csv(args.inputs, m)
    rng = np.random.default_rng(args.seed)
    u = rng.standard_normal((args.steps, m))
    if cplx:
        u = u + 1j * rng.standard_normal((args.steps, m))
    return u


def _weight_for(args, system, tol, default_identity):
    if getattr(args, "weight", None):
        return _load_weight(args.weight)
    if getattr(args, "find_weight", False):
        return find_storage_weight(system, tol).X
    return np.eye(system.n) if default_identity else None


# -- subcommands -------------------------------------------------------------

def run_classify(args):
    tol = _tolerances(args)
    M = io.subspace_from_json(io.load_json(args.path))
    rep = classify(M, tol)
    if args.json:
        print(io.dumps(rep.as_dict()), end="")
        return EXIT_OK
    print(f"relation in K^{rep.p} x K^{rep.q}, dim = {rep.dim}")
    width = max(len(k) for k in rep.FLAGS)
    for name in rep.FLAGS:
        flag = getattr(rep, name)
        mark = "n/a" if flag is None else ("✓" if flag else "✗")
        margin = rep.margins.get(name)
        extra = "" if margin is None else f"  margin {_fmt(margin)}"
        print(f"  {name:<{width}}  {mark}{extra}")
    return EXIT_OK


def run_cayley(args):
    tol = _tolerances(args)
    M = io.subspace_from_json(io.load_json(args.path))
    op = cayley_inverse if args.inverse else cayley
    S = op(M, args.alpha, args.beta, tol)
    _emit(args, io.dumps(io.subspace_to_json(S)))
    return EXIT_OK


def run_check_ph(args):
    tol = _tolerances(args)
    system = _load_system(args.path)
    if isinstance(system, DescriptorSystem):
        if not system.has_identity_E(tol):
            raise DimensionError("check-ph needs a standard system (E = I or null)")
        system = system.as_standard()
    if not (args.weight or args.find_weight):
        raise UsageError("check-ph needs --weight PATH or --find-weight", "--weight")
    X = _weight_for(args, system, tol, default_identity=False)
    rep = is_scattering_ph(system, X, tol)
    if args.json:
        print(io.dumps({"ok": bool(rep.ok), "lmi_residual": rep.residual,
                        "weighted_norm": rep.weighted_norm, "slack": rep.slack,
                        "X": io.matrix_to_json(X)}), end="")
    else:
        print(f"scattering_ph={'yes' if rep.ok else 'no'} lmi_residual={_fmt(rep.residual)} "
              f"weighted_norm={_fmt(rep.weighted_norm)}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def run_find_weight(args):
    tol = _tolerances(args)
    system = _load_system(args.path)
    if isinstance(system, DescriptorSystem):
        if not system.has_identity_E(tol):
            raise DimensionError("find-weight needs a standard system (E = I or null)")
        system = system.as_standard()
    W = find_storage_weight(system, tol)
    _emit(args, io.dumps({"X": io.matrix_to_json(W.X)}))
    return EXIT_OK


def _consistent_x0(system, u0, tol):
    """Minimum-norm state satisfying the algebraic constraints at k = 0."""
    _, _, W = rank_and_bases(system.E.conj().T, tol)
    if W.shape[1] == 0:
        return np.zeros(system.n)
    WA = W.conj().T @ system.A
    rhs = -W.conj().T @ system.B @ u0
    return np.linalg.lstsq(WA, rhs, rcond=None)[0]


def run_simulate(args):
    tol = _tolerances(args)
    doc = io.load_json(args.path)
    if isinstance(doc, dict) and "N" in doc:
        g = io.geometric_from_json(doc)
        cplx = g.N.is_complex
        u = _inputs(args, g.m, cplx)
        x0 = _parse_vector(args.x0, g.n, "--x0")
        traj = simulate_geometric(g, np.zeros(g.n) if x0 is None else x0, u, tol)
        X, E = np.eye(g.n), None
        residual = traj.max_power_residual
    else:
        system = io.system_from_json(doc)
        cplx = any(np.iscomplexobj(getattr(system, k)) for k in "ABCD")
        u = _inputs(args, system.m, cplx)
        x0 = _parse_vector(args.x0, system.n, "--x0")
        X = _weight_for(args, _as_std_for_weight(args, system, tol), tol,
                        default_identity=True)
        if isinstance(system, StandardSystem):
            traj = simulate_standard(system, np.zeros(system.n) if x0 is None else x0, u)
            E = None
        else:
            if x0 is None:
                u0 = u[0] if len(u) else np.zeros(system.m)
                x0 = _consistent_x0(system, u0, tol)
            traj = simulate_descriptor(system, x0, u, tol)
            E = system.E
        residual = float(traj.residuals.max()) if traj.steps else 0.0
    rep = check_dissipation(traj, X, E, tol)
    _emit(args, io.trajectory_csv(traj, rep.margins))
    summary = f"min_margin={_fmt(rep.min_margin)} max_residual={_fmt(residual)} steps={traj.steps}"
    print(summary, file=_sys.stdout if args.output else _sys.stderr)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _as_std_for_weight(args, system, tol):
    if isinstance(system, StandardSystem) or not args.find_weight:
        return system
    if not system.has_identity_E(tol):
        raise DimensionError("--find-weight needs a standard system (E = I or null)")
    return system.as_standard()


def run_discretize(args):
    tol = _tolerances(args)
    M = io.subspace_from_json(io.load_json(args.path), "M")
    L = None
    if args.lagrangian:
        L = io.subspace_from_json(io.load_json(args.lagrangian), "L")
    S = discretize_dh(M, L, args.h, tol)
    _emit(args, io.dumps(io.subspace_to_json(S)))
    contractive = classify(S, tol).contractive
    print(f"contractive={'yes' if contractive else 'no'}",
          file=_sys.stdout if args.output else _sys.stderr)
    return EXIT_OK if contractive else EXIT_FAIL


def _state_manifest(n1, n2):
    return {"x1": slice(0, n1), "x2": slice(n1, n1 + n2)}


def run_interconnect(args):
    tol = _tolerances(args)
    sys1 = _load_system(args.system1, "system1")
    sys2 = _load_system(args.system2, "system2")
    if args.coupling:
        spec = io.coupling_from_json(io.load_json(args.coupling))
        if args.mode and args.mode != spec.mode:
            raise UsageError(f"--mode {args.mode} conflicts with coupling file mode "
                             f"{spec.mode}", "--mode")
    elif args.mode in ("redheffer", "feedback"):
        spec = io.CouplingSpec(args.mode)
    else:
        raise UsageError("give --coupling PATH, or --mode redheffer|feedback", "--coupling")
    weights = None
    if args.weights:
        weights = [_load_weight(p) for p in args.weights]
    lines, ok = [], True

    if spec.mode == "general" or (spec.mode == "redheffer" and spec.relation is not None
                                  and not _is_redheffer(spec.relation, sys1, sys2)):
        comp = general_interconnect(sys1, sys2, spec.relation, tol)
        d = comp.system
        e1 = sys1.m - sys1.m1
        o1 = sys1.p - sys1.m1
        blocks = {"state": comp.blocks,
                  "input": {"u1": slice(0, e1), "u2": slice(e1, d.m)},
                  "output": {"y1": slice(0, o1), "y2": slice(o1, d.p)}}
        doc = io.system_to_json(d, blocks)
        if weights is not None:
            X = np.zeros((d.n, d.n), dtype=np.result_type(*weights))
            X[comp.blocks["x1"], comp.blocks["x1"]] = weights[0]
            X[comp.blocks["x2"], comp.blocks["x2"]] = weights[1]
            rng = np.random.default_rng(args.seed)
            u = rng.standard_normal((args.steps, d.m))
            x0 = _consistent_x0(d, u[0] if len(u) else np.zeros(d.m), tol)
            traj = simulate_descriptor(d, x0, u, tol)
            rep = check_dissipation(traj, X, d.E, tol)
            ok = rep.ok
            lines.append(f"storage_check={'pass' if ok else 'fail'} "
                         f"min_margin={_fmt(rep.min_margin)} steps={traj.steps}")
    elif spec.mode == "redheffer":
        red, inv = redheffer_reduce(sys1, sys2, tol)
        n1 = sys1.n
        e1 = sys1.m - sys1.m1
        o1 = sys1.p - sys1.m1
        blocks = {"state": _state_manifest(n1, sys2.n),
                  "input": {"u1": slice(0, e1), "u2": slice(e1, red.m)},
                  "output": {"y1": slice(0, o1), "y2": slice(o1, red.p)}}
        doc = io.system_to_json(red, blocks)
        if weights is not None:
            rep = is_scattering_ph(red, compose_storage(*weights).X, tol)
            ok = rep.ok
            lines.append(f"scattering_ph={'yes' if ok else 'no'} "
                         f"lmi_residual={_fmt(rep.residual)}")
    else:
        s1, s2 = (s.as_standard() if isinstance(s, DescriptorSystem) else s
                  for s in (sys1, sys2))
        k = s1.m
        if weights is not None:
            Ahat, rep = closed_loop(s1, s2, weights[0], weights[1], tol)
            ok = rep.contractive
            lines.append(f"closed_loop_contractive={'yes' if ok else 'no'} "
                         f"lmi_residual={_fmt(rep.lmi_residual)} "
                         f"weighted_norm={_fmt(rep.weighted_norm)}")
        else:
            red, _ = redheffer_reduce(s1.with_partition(k), s2.with_partition(k), tol)
            Ahat = red.A
        n = Ahat.shape[0]
        closed = StandardSystem(Ahat, np.zeros((n, 0)), np.zeros((0, n)), np.zeros((0, 0)))
        doc = io.system_to_json(closed, {"state": _state_manifest(s1.n, s2.n)})
    _emit(args, io.dumps(doc))
    for line in lines:
        print(line, file=_sys.stdout if args.output else _sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _is_redheffer(R, sys1, sys2):
    ref = redheffer_coupling(sys1.m1, sys2.m1)
    return all(getattr(R, k).shape == getattr(ref, k).shape
               and np.allclose(getattr(R, k), getattr(ref, k))
               for k in ("M11", "M12", "M21", "M22"))


def run_dilate(args):
    tol = _tolerances(args)
    system = _load_system(args.path)
    if isinstance(system, DescriptorSystem):
        if not system.has_identity_E(tol):
            raise DimensionError("dilate needs a standard system (E = I or null)")
        system = system.as_standard()
    if args.weight:
        X = _load_weight(args.weight)
    else:
        X = find_storage_weight(system, tol).X
    g = dilate(system, X, tol)
    _emit(args, io.dumps(io.geometric_to_json(g)))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="dtph",
        description="Discrete-time scattering port-Hamiltonian systems toolbox.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="PSD tolerance (default: $DTPH_TOL or 1e-10)")
    common.add_argument("--output", "-o", default=None, help="write result to this file")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="classify a subspace")
    c.add_argument("path")
    c.add_argument("--json", action="store_true", help="machine-readable report")
    c.set_defaults(func=run_classify)

    c = sub.add_parser("cayley", parents=[common], help="Cayley transform of a subspace")
    c.add_argument("path")
    c.add_argument("--alpha", type=float, default=1.0)
    c.add_argument("--beta", type=float, default=1.0)
    c.add_argument("--inverse", action="store_true", help="apply the inverse transform")
    c.set_defaults(func=run_cayley)

    c = sub.add_parser("check-ph", parents=[common], help="verify the weighted LMI")
    c.add_argument("path")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--weight", help="storage weight X (Matrix JSON)")
    g.add_argument("--find-weight", action="store_true", help="search for X first")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=run_check_ph)

    c = sub.add_parser("find-weight", parents=[common], help="search for a storage weight")
    c.add_argument("path")
    c.set_defaults(func=run_find_weight)

    c = sub.add_parser("simulate", parents=[common],
                       help="simulate a system or geometric system, write CSV")
    c.add_argument("path")
    c.add_argument("--steps", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--inputs", help="input CSV (overrides seeded random inputs)")
    c.add_argument("--x0", help="initial state, comma separated")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--weight", help="storage weight for the margins (default: identity)")
    g.add_argument("--find-weight", action="store_true")
    c.set_defaults(func=run_simulate)

    c = sub.add_parser("discretize", parents=[common], help="trapezoidal discretization")
    c.add_argument("path", help="monotone subspace M")
    c.add_argument("--h", type=float, required=True, help="step size")
    c.add_argument("--lagrangian", help="Lagrangian subspace L (default: identity)")
    c.set_defaults(func=run_discretize)

    c = sub.add_parser("interconnect", parents=[common], help="couple two systems")
    c.add_argument("system1")
    c.add_argument("system2")
    c.add_argument("--coupling", help="coupling JSON")
    c.add_argument("--mode", choices=io.COUPLING_MODES)
    c.add_argument("--weights", nargs=2, metavar=("X1", "X2"),
                   help="storage weights of the two systems")
    c.add_argument("--steps", type=int, default=100,
                   help="simulation length for the general-mode storage check")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=run_interconnect)

    c = sub.add_parser("dilate", parents=[common], help="geometric realization")
    c.add_argument("path")
    c.add_argument("--weight", help="storage weight (default: search)")
    c.set_defaults(func=run_dilate)
    return p


def _exit_code(exc):
    if isinstance(exc, CouplingError):
        return EXIT_COUPLING
    if isinstance(exc, FormatError):
        return EXIT_PARSE
    if isinstance(exc, DimensionError):
        return EXIT_DIM
    if isinstance(exc, StepError):
        return EXIT_STEP
    if isinstance(exc, (IndexTooHigh, InconsistentInitialState, NotMonotone, NotLagrangian,
                        NotScatteringPH, NotFound, NotPositiveDefinite, SingularPencil)):
        return EXIT_PRECOND
    return EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
        print("error: --steps must be non-negative", file=_sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_PARSE
    except DTPHError as exc:
        code = _exit_code(exc)
        where = getattr(exc, "step", None)
        prefix = f"{type(exc).__name__}"
        if where is not None:
            prefix += f" at step {where}"
        print(f"error: {prefix}: {exc}", file=_sys.stderr)
        return code
    except ValueError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    _sys.exit(main())
