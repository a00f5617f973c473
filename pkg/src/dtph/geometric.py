"""Geometric (coordinate-free) discrete-time port-Hamiltonian systems.

A system is a pair ``(N, Cres)``: a maximal norm-preserving relation
``N`` in K^(n+r+m) x K^(n+r+m) whose pairs are ordered as

    ((x[k+1], f_R, y[k]), (x[k], e_R, u[k]))

and a maximal contractive relation ``Cres`` of pairs ``(f_R, e_R)`` that
closes the resistive port.  Norm preservation of ``N`` gives the power
balance ``|x+|^2 + |f|^2 + |y|^2 = |x|^2 + |e|^2 + |u|^2``; contractivity
of ``Cres`` turns it into scattering passivity.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DimensionError, DTPHError, Inconsistent, InconsistentStep,
                     NonUnique, NonUniqueStep, NotLagrangian, NotMonotone,
                     NotScatteringPH)
from .linalg import DEFAULT_TOL, as_vector, hpd_sqrt, solve_square
from .subspace import (Subspace, as_graph, cayley, classify, compose, from_image,
                       graph, to_kernel)
from .systems import Trajectory, _weight_matrix, is_scattering_ph

__all__ = ["GeometricPH", "ValidationReport", "GeoStepResult", "GeoTrajectory",
           "validate", "step", "simulate", "dilate", "discretize_dh", "step_relation"]


@dataclass(frozen=True, eq=False)
class GeometricPH:
    n: int
    r: int
    m: int
    N: Subspace
    C: Subspace

    def __post_init__(self):
        size = self.n + self.r + self.m
        if (self.N.p, self.N.q) != (size, size):
            raise DimensionError(
                f"N must live in K^{size} x K^{size}, got K^{self.N.p} x K^{self.N.q}")
        if (self.C.p, self.C.q) != (self.r, self.r):
            raise DimensionError(
                f"resistive relation must live in K^{self.r} x K^{self.r}, "
                f"got K^{self.C.p} x K^{self.C.q}")


@dataclass
class ValidationReport:
    ok: bool
    messages: list
    N_report: object
    C_report: object

    def __bool__(self):
        return self.ok


def validate(g, tol=DEFAULT_TOL):
    """Check that ``N`` is maximal norm preserving and ``Cres`` maximal
    contractive.  Never raises on a violation; inspect ``ok``/``messages``."""
    rN = classify(g.N, tol)
    rC = classify(g.C, tol)
    msgs = []
    if not rN.norm_preserving:
        msgs.append(f"N is not norm preserving (|P^H P - Q^H Q| = {rN.margins['norm_preserving']:.3e})")
    if g.N.dim != g.n + g.r + g.m:
        msgs.append(f"N has dimension {g.N.dim}, expected {g.n + g.r + g.m}")
    if not rC.contractive:
        msgs.append(f"resistive relation is not contractive "
                    f"(min eig {rC.margins['contractive']:.3e})")
    if g.C.dim != g.r:
        msgs.append(f"resistive relation has dimension {g.C.dim}, expected {g.r}")
    return ValidationReport(not msgs, msgs, rN, rC)


@dataclass
class GeoStepResult:
    x_next: np.ndarray
    y: np.ndarray
    f_R: np.ndarray
    e_R: np.ndarray
    power_residual: float = field(init=False)
    x: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None

    def __post_init__(self):
        def sq(v):
            return float(np.real(np.vdot(v, v)))
        self.power_residual = abs(sq(self.x_next) + sq(self.f_R) + sq(self.y)
                                  - sq(self.x) - sq(self.e_R) - sq(self.u))


class _Stepper:
    """Precomputed square system for repeated steps of one GeometricPH."""

    def __init__(self, g, tol):
        n, r, m = g.n, g.r, g.m
        kN = to_kernel(g.N, tol)
        kC = to_kernel(g.C, tol)
        # N: K1 (x+, f, y) + K2 (x, e, u) = 0;  C: C1 f + C2 e = 0
        K1, K2 = kN.K1, kN.K2
        rows_N, rows_C = K1.shape[0], kC.K1.shape[0]
        dtype = np.result_type(K1, K2, kC.K1, kC.K2)
        # unknown order: (x+, f, y, e)
        lhs = np.zeros((rows_N + rows_C, n + r + m + r), dtype=dtype)
        lhs[:rows_N, :n + r + m] = K1
        lhs[:rows_N, n + r + m:] = K2[:, n:n + r]
        lhs[rows_N:, n:n + r] = kC.K1
        lhs[rows_N:, n + r + m:] = kC.K2
        self.lhs = lhs
        self.known_x = np.vstack([-K2[:, :n], np.zeros((rows_C, n), dtype=dtype)])
        self.known_u = np.vstack([-K2[:, n + r:], np.zeros((rows_C, m), dtype=dtype)])
        self.g = g
        self.tol = tol

    def __call__(self, x, u, k=None):
        n, r, m = self.g.n, self.g.r, self.g.m
        rhs = self.known_x @ x + self.known_u @ u
        try:
            sol, _ = solve_square(self.lhs, rhs, self.tol)
        except NonUnique as exc:
            raise NonUniqueStep(f"geometric step{'' if k is None else f' {k}'}: {exc}",
                                step=k, kernel_dim=exc.kernel_dim) from exc
        except Inconsistent as exc:
            raise InconsistentStep(f"geometric step{'' if k is None else f' {k}'}: {exc}",
                                   step=k, residual=exc.residual) from exc
        x_next, f, y, e = np.split(sol, [n, n + r, n + r + m])
        return GeoStepResult(x_next, y, f, e, x=x, u=u)


def step(g, x, u, tol=DEFAULT_TOL):
    """One step: solve for ``(x+, f_R, y, e_R)`` given ``(x, u)``.

    The kernel equations of ``N`` and ``Cres`` form a square system in
    the unknowns; a singular or inconsistent system raises
    :class:`NonUniqueStep` / :class:`InconsistentStep` rather than
    returning a least-squares guess.
    """
    x = as_vector(x, g.n, "x")
    u = as_vector(u, g.m, "u")
    return _Stepper(g, tol)(x, u)


@dataclass(eq=False)
class GeoTrajectory(Trajectory):
    f_R: np.ndarray = None
    e_R: np.ndarray = None
    power_residuals: np.ndarray = None
    margins: np.ndarray = None

    @property
    def max_power_residual(self):
        return float(self.power_residuals.max()) if self.steps else 0.0

    @property
    def min_margin(self):
        return float(self.margins.min()) if self.steps else 0.0


def simulate(g, x0, inputs, tol=DEFAULT_TOL):
    """Iterate :func:`step` and record power residuals and the passivity
    margins ``|u|^2 - |y|^2 - (|x+|^2 - |x|^2)``."""
    x = as_vector(x0, g.n, "x0")
    u = np.asarray(inputs)
    if u.ndim == 1:
        u = u.reshape(-1, g.m) if g.m else u.reshape(-1, 0)
    if u.shape[1:] != (g.m,):
        raise DimensionError(f"inputs must have shape (N, {g.m}), got {u.shape}")
    N = u.shape[0]
    stepper = _Stepper(g, tol)
    dtype = np.result_type(stepper.lhs, x, u)
    xs = np.zeros((N + 1, g.n), dtype=dtype)
    ys = np.zeros((N, g.m), dtype=dtype)
    fs = np.zeros((N, g.r), dtype=dtype)
    es = np.zeros((N, g.r), dtype=dtype)
    power = np.zeros(N)
    margins = np.zeros(N)
    xs[0] = x
    for k in range(N):
        res = stepper(xs[k], u[k], k)
        xs[k + 1], ys[k], fs[k], es[k] = res.x_next, res.y, res.f_R, res.e_R
        power[k] = res.power_residual
        margins[k] = (np.vdot(u[k], u[k]).real - np.vdot(ys[k], ys[k]).real
                      - (np.vdot(xs[k + 1], xs[k + 1]).real - np.vdot(xs[k], xs[k]).real))
    return GeoTrajectory(xs, u, ys, power.copy(), f_R=fs, e_R=es,
                         power_residuals=power, margins=margins)


def _halmos(T):
    """Unitary dilation ``[[T, (I - T T^H)^½], [(I - T^H T)^½, -T^H]]``.

    The defect roots come from one SVD of ``T`` so that the intertwining
    ``T (I - T^H T)^½ = (I - T T^H)^½ T`` holds to roundoff.
    """
    rows, cols = T.shape
    W, s, Vh = np.linalg.svd(T)
    s = np.clip(s, 0.0, 1.0)
    k = len(s)
    d_rows = np.ones(rows)
    d_rows[:k] = np.sqrt(1.0 - s ** 2)
    d_cols = np.ones(cols)
    d_cols[:k] = np.sqrt(1.0 - s ** 2)
    V = Vh.conj().T
    D_star = (W * d_rows) @ W.conj().T
    D = (V * d_cols) @ V.conj().T
    return np.block([[T, D_star], [D, -T.conj().T]])


def dilate(sys, X, tol=DEFAULT_TOL):
    """Realize a scattering-pH standard system as a GeometricPH.

    With ``S = X^½`` the weighted operator ``T = diag(S, I) [A B; C D]
    diag(S^-1, I)`` is a contraction.  Its Halmos dilation ``U`` maps
    ``(xi, u, e)`` to ``(xi+, y, f)`` unitarily; ``N`` collects the pairs
    ``((xi+, f, y), (xi, e, u))`` and the resistive port is closed by
    ``e = 0`` (``r = n + m``).  Simulating from ``xi0 = S x0`` reproduces
    the outputs, with states ``xi[k] = S x[k]``.

    Raises
    ------
    NotScatteringPH
        If ``(sys, X)`` fails the weighted LMI.
    """
    Xm = _weight_matrix(X)
    if sys.p != sys.m:
        raise DimensionError("dilation needs as many outputs as inputs")
    rep = is_scattering_ph(sys, Xm, tol)
    if not rep.ok:
        raise NotScatteringPH(f"weighted LMI fails (largest eigenvalue {rep.residual:.3e})")
    n, m = sys.n, sys.m
    S = hpd_sqrt(Xm, tol) if n else np.zeros((0, 0))
    S_inv = np.linalg.inv(S) if n else S
    T = sys.matrix.astype(np.result_type(sys.matrix, S), copy=True)
    T[:n, :] = S @ T[:n, :]
    T[:, :n] = T[:, :n] @ S_inv
    U = _halmos(T)
    r = n + m
    size = n + r + m
    # U acts on (xi, u, e) -> (xi+, y, f); N holds pairs (out', in') reordered
    # in' = (xi, e, u), out' = (xi+, f, y)
    perm_in = np.concatenate([np.arange(n), n + m + np.arange(r), n + np.arange(m)])
    perm_out = np.concatenate([np.arange(n), n + m + np.arange(r), n + np.arange(m)])
    # column j of the reordered map takes in'[j] = in[perm_in[j]]
    U_re = U[perm_out][:, perm_in]
    N = from_image(U_re, np.eye(size, dtype=U.dtype), tol)
    C = graph(np.zeros((r, r)), tol)
    return GeometricPH(n, r, m, N, C)


def discretize_dh(M, L=None, h=None, tol=DEFAULT_TOL):
    """Trapezoidal discretization ``C_{h/2,1}(M^{-1} L)`` of a
    continuous-time dissipative Hamiltonian relation.

    Parameters
    ----------
    M : Subspace
        Monotone relation.
    L : Subspace, optional
        Lagrangian relation; the identity graph when omitted.
    h : float
        Step size, strictly positive (no default).

    Returns
    -------
    Subspace
        Pairs ``(z[k], z[k+1])`` of the one-step relation.  With ``L``
        omitted it is verified to be contractive.
    """
    if h is None or not h > 0:
        raise ValueError("step size h must be a positive number")
    rM = classify(M, tol)
    if not rM.monotone:
        raise NotMonotone(f"M is not monotone (min eig {rM.margins.get('monotone', float('nan')):.3e})")
    identity = L is None
    if identity:
        L = graph(np.eye(M.q), tol)
    elif not classify(L, tol).lagrangian:
        raise NotLagrangian("L is not Lagrangian")
    S = cayley(compose(M, L, tol), h / 2.0, 1.0, tol)
    if identity:
        rS = classify(S, tol)
        if not rS.contractive:
            raise DTPHError(
                f"discretized relation is not contractive (min eig {rS.margins['contractive']:.3e})")
    return S


def step_relation(S, z, tol=DEFAULT_TOL):
    """Advance ``z`` through the graph relation ``S``: returns ``T z``."""
    T = as_graph(S, tol)
    return T @ as_vector(z, S.p, "z")
