"""Discrete-time descriptor and standard state-space systems.

Descriptor systems ``E x[k+1] = A x[k] + B u[k], y[k] = C x[k] + D u[k]``
with Kronecker index at most one are causal and reduce to a standard
system on ``r = rank E`` states plus an algebraic equation for the rest.

Scattering passivity is checked with the supply rate ``|u|^2 - |y|^2`` and
quadratic storage ``V(xi) = xi^H X xi`` evaluated at ``xi = E x``.  With
that convention the weighted LMI

    [A B; C D]^H diag(X, I) [A B; C D] <= diag(X, I)

is equivalent to the per-step dissipation inequality for every state
and input.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg as la

from .errors import (DimensionError, IndexTooHigh, Inconsistent, InconsistentInitialState,
                     InconsistentStep, NonUnique, NonUniqueStep, NotFound,
                     NotPositiveDefinite, SingularPencil)
from .linalg import (DEFAULT_TOL, as_matrix, as_vector, herm, hpd_sqrt, op_norm2,
                     rank_and_bases, solve_square)

__all__ = ["StandardSystem", "DescriptorSystem", "StorageWeight", "Trajectory",
           "IndexReport", "Reconstruction", "DissipationReport", "PHReport",
           "index_le_one", "reduce_to_standard", "simulate_standard",
           "simulate_descriptor", "check_dissipation", "is_scattering_ph",
           "find_storage_weight"]


def _split(m1, total, name):
    if m1 is None:
        return
    if not 0 <= m1 <= total:
        raise DimensionError(f"partition m1={m1} does not fit {name} of width {total}")


@dataclass(frozen=True, eq=False)
class StandardSystem:
    """``x[k+1] = A x[k] + B u[k]``, ``y[k] = C x[k] + D u[k]``.

    ``m1`` optionally marks the first ``m1`` inputs and the first ``m1``
    outputs as coupling ports; the rest are external.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    m1: Optional[int] = None

    def __post_init__(self):
        A, B, C, D = (as_matrix(M, name) for M, name in
                      zip((self.A, self.B, self.C, self.D), "ABCD"))
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != n or C.shape[1] != n:
            raise DimensionError(
                f"B has {B.shape[0]} rows and C has {C.shape[1]} columns, expected {n}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionError(f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}")
        _split(self.m1, B.shape[1], "inputs")
        _split(self.m1, C.shape[0], "outputs")
        for name, M in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, M)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def matrix(self):
        """The block operator ``[A B; C D]``."""
        return np.block([[self.A, self.B], [self.C, self.D]])

    def blocks(self):
        """Port blocks ``(B1, B2, C1, C2, D11, D12, D21, D22)``."""
        if self.m1 is None:
            raise DimensionError("system has no port partition")
        k = self.m1
        B, C, D = self.B, self.C, self.D
        return (B[:, :k], B[:, k:], C[:k], C[k:],
                D[:k, :k], D[:k, k:], D[k:, :k], D[k:, k:])

    def with_partition(self, m1):
        return StandardSystem(self.A, self.B, self.C, self.D, m1)

    def as_descriptor(self):
        return DescriptorSystem(np.eye(self.n, dtype=self.A.dtype), self.A, self.B,
                                self.C, self.D, self.m1)


@dataclass(frozen=True, eq=False)
class DescriptorSystem:
    """``E x[k+1] = A x[k] + B u[k]``, ``y[k] = C x[k] + D u[k]``."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    m1: Optional[int] = None

    def __post_init__(self):
        E = as_matrix(self.E, "E")
        std = StandardSystem(self.A, self.B, self.C, self.D, self.m1)
        if E.shape != std.A.shape:
            raise DimensionError(f"E must be {std.A.shape}, got {E.shape}")
        object.__setattr__(self, "E", E)
        for name in "ABCD":
            object.__setattr__(self, name, getattr(std, name))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    def blocks(self):
        return StandardSystem(self.A, self.B, self.C, self.D, self.m1).blocks()

    def has_identity_E(self, tol=DEFAULT_TOL):
        return bool(np.linalg.norm(self.E - np.eye(self.n)) <= tol.residual_rtol * max(1, self.n))

    def as_standard(self):
        """Drop ``E`` (caller asserts it is the identity)."""
        return StandardSystem(self.A, self.B, self.C, self.D, self.m1)


@dataclass(frozen=True, eq=False)
class StorageWeight:
    """Hermitian positive definite ``X`` defining ``H(x) = x^H X x / 2``."""

    X: np.ndarray

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        if X.shape[0] != X.shape[1]:
            raise DimensionError(f"storage weight must be square, got {X.shape}")
        scale = max(1.0, float(np.max(np.abs(X)))) if X.size else 1.0
        if np.linalg.norm(X - X.conj().T) > 1e-8 * scale:
            raise NotPositiveDefinite("storage weight is not Hermitian")
        X = herm(X)
        if X.size and la.eigvalsh(X)[0] <= 0:
            raise NotPositiveDefinite("storage weight is not positive definite",
                                      float(la.eigvalsh(X)[0]))
        object.__setattr__(self, "X", X)

    @property
    def n(self):
        return self.X.shape[0]

    def sqrt(self, tol=DEFAULT_TOL):
        return hpd_sqrt(self.X, tol)

    def hamiltonian(self, x):
        x = as_vector(x, self.n)
        return 0.5 * float(np.real(x.conj() @ self.X @ x))


def _weight_matrix(X):
    return X.X if isinstance(X, StorageWeight) else as_matrix(X, "X")


@dataclass(eq=False)
class Trajectory:
    """States ``x_0..x_N``, inputs and outputs ``0..N-1`` and the
    per-step solver residuals."""

    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        N = self.inputs.shape[0]
        if self.states.shape[0] != N + 1 or self.outputs.shape[0] != N or \
                self.residuals.shape[0] != N:
            raise DimensionError("trajectory lengths are inconsistent")

    @property
    def steps(self):
        return self.inputs.shape[0]


def _inputs_array(inputs, m):
    u = np.asarray(inputs)
    if u.ndim == 1 and m == 1:
        u = u.reshape(-1, 1)
    if u.ndim == 1 and u.size == 0:
        u = u.reshape(0, m)
    if u.ndim != 2 or u.shape[1] != m:
        raise DimensionError(f"inputs must have shape (N, {m}), got {u.shape}")
    if not np.iscomplexobj(u):
        u = u.astype(float)
    return u


# -- index and reduction -----------------------------------------------------

class IndexReport(NamedTuple):
    ok: bool
    rank_E: int
    rank_augmented: int
    n: int

    def __bool__(self):
        return bool(self.ok)


_PROBES = (0.7315 + 0.2137j, -1.618 + 0.577j, 2.2361 - 1.4142j)


def _check_regular(E, A, tol):
    n = E.shape[0]
    for lam in _PROBES:
        scale = abs(lam) * op_norm2(E) + op_norm2(A)
        if rank_and_bases(lam * E - A, tol, scale)[0] == n:
            return
    raise SingularPencil("det(sE - A) vanishes at every probe point; pencil is singular")


def index_le_one(E, A, tol=DEFAULT_TOL):
    """Test whether the regular pencil ``(E, A)`` has index at most one.

    The test is ``rank [E, A K] == n`` with ``K`` an orthonormal basis of
    ``ker E``.

    Raises
    ------
    SingularPencil
        If ``sE - A`` is rank deficient at every probe point.
    """
    E = as_matrix(E, "E")
    A = as_matrix(A, "A")
    if E.shape != A.shape or E.shape[0] != E.shape[1]:
        raise DimensionError(f"E and A must be square of equal size, got {E.shape}, {A.shape}")
    n = E.shape[0]
    if n == 0:
        return IndexReport(True, 0, 0, 0)
    _check_regular(E, A, tol)
    rank_E, _, kernel = rank_and_bases(E, tol)
    rank_aug = rank_and_bases(np.hstack([E, A @ kernel]), tol,
                              max(op_norm2(E), op_norm2(A)))[0]
    return IndexReport(rank_aug == n, rank_E, rank_aug, n)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """``x = Phi x_red + Psi u`` and ``x_red = Proj x``."""

    Phi: np.ndarray
    Psi: np.ndarray
    Proj: np.ndarray

    def full_state(self, x_red, u):
        return self.Phi @ x_red + self.Psi @ u

    def reduced_state(self, x):
        return self.Proj @ x


def reduce_to_standard(sys, tol=DEFAULT_TOL):
    """Eliminate the algebraic part of an index-one descriptor system.

    With ``E = U diag(S, 0) V^H`` and ``x = V (xi1, xi2)``, the algebraic
    rows give ``xi2 = -A22^{-1} (A21 xi1 + B2 u)``; substituting leaves a
    standard system in ``xi1``.  When ``E`` is invertible the reduced
    system is ``(E^{-1} A, E^{-1} B, C, D)`` on the original state.

    Returns
    -------
    StandardSystem, Reconstruction
    """
    rep = index_le_one(sys.E, sys.A, tol)
    if not rep.ok:
        raise IndexTooHigh(
            f"pencil has index > 1 (rank [E, A ker E] = {rep.rank_augmented} < {rep.n})")
    n, m = sys.n, sys.m
    E, A, B, C, D = sys.E, sys.A, sys.B, sys.C, sys.D
    if rep.rank_E == n:
        red = StandardSystem(la.solve(E, A), la.solve(E, B), C, D, sys.m1)
        eye = np.eye(n, dtype=red.A.dtype)
        return red, Reconstruction(eye, np.zeros((n, m), dtype=red.A.dtype), eye)

    r = rep.rank_E
    U, s, Vh = la.svd(E)
    V = Vh.conj().T
    At = U.conj().T @ A @ V
    Bt = U.conj().T @ B
    Ct = C @ V
    A11, A12, A21, A22 = At[:r, :r], At[:r, r:], At[r:, :r], At[r:, r:]
    B1, B2 = Bt[:r], Bt[r:]
    C1, C2 = Ct[:, :r], Ct[:, r:]
    # xi2 = F xi1 + G u
    F = -la.solve(A22, A21)
    G = -la.solve(A22, B2)
    S_inv = 1.0 / s[:r]
    red = StandardSystem(S_inv[:, None] * (A11 + A12 @ F),
                         S_inv[:, None] * (B1 + A12 @ G),
                         C1 + C2 @ F, D + C2 @ G, sys.m1)
    V1, V2 = V[:, :r], V[:, r:]
    return red, Reconstruction(V1 + V2 @ F, V2 @ G, V1.conj().T)


# -- simulation --------------------------------------------------------------

def simulate_standard(sys, x0, inputs):
    """Run the recursion ``x[k+1] = A x[k] + B u[k]`` exactly."""
    u = _inputs_array(inputs, sys.m)
    x = as_vector(x0, sys.n, "x0")
    N = u.shape[0]
    dtype = np.result_type(sys.A, sys.B, sys.C, sys.D, x, u)
    xs = np.zeros((N + 1, sys.n), dtype=dtype)
    ys = np.zeros((N, sys.p), dtype=dtype)
    xs[0] = x
    for k in range(N):
        ys[k] = sys.C @ xs[k] + sys.D @ u[k]
        xs[k + 1] = sys.A @ xs[k] + sys.B @ u[k]
    return Trajectory(xs, u, ys, np.zeros(N))


def simulate_descriptor(sys, x0, inputs, tol=DEFAULT_TOL, final_input=None):
    """Simulate an index-one descriptor system by per-step linear solves.

    Each step solves ``[E; W^H A] x[k+1] = [A x[k] + B u[k]; -W^H B u[k+1]]``
    where the columns of ``W`` span the left kernel of ``E``.  The
    algebraic components of the last state ``x_N`` depend on ``u_N``,
    which is taken from `final_input` (zero by default); ``E x_N`` and
    all outputs are independent of that choice.

    Raises
    ------
    IndexTooHigh, InconsistentInitialState, NonUniqueStep, InconsistentStep
    """
    rep = index_le_one(sys.E, sys.A, tol)
    if not rep.ok:
        raise IndexTooHigh(
            f"pencil has index > 1 (rank [E, A ker E] = {rep.rank_augmented} < {rep.n})")
    u = _inputs_array(inputs, sys.m)
    N = u.shape[0]
    uN = np.zeros(sys.m) if final_input is None else as_vector(final_input, sys.m)
    u_ext = np.vstack([u, uN[None, :]]) if N else uN[None, :]
    x = as_vector(x0, sys.n, "x0")
    E, A, B, C, D = sys.E, sys.A, sys.B, sys.C, sys.D
    _, _, W = rank_and_bases(E.conj().T, tol)
    WA, WB = W.conj().T @ A, W.conj().T @ B

    res0 = np.linalg.norm(WA @ x + WB @ u_ext[0])
    bound = tol.residual_rtol * (op_norm2(A) * np.linalg.norm(x)
                                 + op_norm2(B) * np.linalg.norm(u_ext[0]) + 1e-300)
    if W.shape[1] and res0 > max(bound, 1e-14):
        raise InconsistentInitialState(
            f"x0 violates the algebraic constraints (residual {res0:.3e})", float(res0))

    stacked = np.vstack([E, WA])
    dtype = np.result_type(E, A, B, C, D, x, u)
    xs = np.zeros((N + 1, sys.n), dtype=dtype)
    ys = np.zeros((N, sys.p), dtype=dtype)
    res = np.zeros(N)
    xs[0] = x
    for k in range(N):
        ys[k] = C @ xs[k] + D @ u[k]
        rhs = np.concatenate([A @ xs[k] + B @ u[k], -WB @ u_ext[k + 1]])
        try:
            xs[k + 1], _ = solve_square(stacked, rhs, tol)
        except NonUnique as exc:
            raise NonUniqueStep(f"step {k}: {exc}", step=k, kernel_dim=exc.kernel_dim) from exc
        except Inconsistent as exc:
            raise InconsistentStep(f"step {k}: {exc}", step=k, residual=exc.residual) from exc
        res[k] = np.linalg.norm(E @ xs[k + 1] - A @ xs[k] - B @ u[k])
    return Trajectory(xs, u, ys, res)


# -- passivity ---------------------------------------------------------------

class DissipationReport(NamedTuple):
    ok: bool
    margins: np.ndarray
    min_margin: float

    def __bool__(self):
        return bool(self.ok)


def _quad(X, v):
    return float(np.real(v.conj() @ X @ v))


def check_dissipation(traj, X, E=None, tol=DEFAULT_TOL):
    """Per-step margins of ``V(E x[k+1]) - V(E x[k]) <= |u[k]|^2 - |y[k]|^2``.

    ``margin[k] = |u[k]|^2 - |y[k]|^2 - (V(E x[k+1]) - V(E x[k]))`` with
    ``V(xi) = xi^H X xi``.  The report is ok when every margin is at least
    ``-psd_atol * (1 + largest term)``.
    """
    Xm = _weight_matrix(X)
    n = traj.states.shape[1]
    if Xm.shape != (n, n):
        raise DimensionError(f"weight must be {n}x{n}, got {Xm.shape}")
    Em = np.eye(n) if E is None else as_matrix(E, "E")
    N = traj.steps
    margins = np.zeros(N)
    worst_ok = True
    for k in range(N):
        supply_in = float(np.real(np.vdot(traj.inputs[k], traj.inputs[k])))
        supply_out = float(np.real(np.vdot(traj.outputs[k], traj.outputs[k])))
        v1 = _quad(Xm, Em @ traj.states[k + 1])
        v0 = _quad(Xm, Em @ traj.states[k])
        margins[k] = supply_in - supply_out - (v1 - v0)
        scale = max(supply_in, supply_out, abs(v1), abs(v0))
        if margins[k] < -tol.psd_slack(scale):
            worst_ok = False
    min_margin = float(margins.min()) if N else 0.0
    return DissipationReport(worst_ok, margins, min_margin)


class PHReport(NamedTuple):
    ok: bool
    residual: float
    weighted_norm: float
    slack: float

    def __bool__(self):
        return bool(self.ok)


def _lmi(sys, Xm):
    G = sys.matrix
    W_in = la.block_diag(Xm, np.eye(sys.m))
    W_out = la.block_diag(Xm, np.eye(sys.p))
    return herm(G.conj().T @ W_out @ G - W_in)


def is_scattering_ph(sys, X, tol=DEFAULT_TOL):
    """Check ``[A B; C D]^H diag(X, I) [A B; C D] <= diag(X, I)``.

    Returns a :class:`PHReport` with the largest eigenvalue of the LMI
    matrix (``residual``) and the weighted spectral norm
    ``|| diag(X^½, I) [A B; C D] diag(X^-½, I) ||``.

    Raises
    ------
    NotPositiveDefinite
        If `X` is not Hermitian positive definite.
    DimensionError
        If `X` does not match the state dimension.
    """
    Xm = _weight_matrix(X)
    if Xm.shape != (sys.n, sys.n):
        raise DimensionError(f"weight must be {sys.n}x{sys.n}, got {Xm.shape}")
    S = hpd_sqrt(Xm, tol)
    H = _lmi(sys, Xm)
    eigs = la.eigvalsh(H) if H.size else np.zeros(1)
    residual = float(eigs[-1])
    slack = tol.psd_slack(float(np.max(np.abs(eigs))))
    S_out = la.block_diag(S, np.eye(sys.p))
    S_in_inv = la.block_diag(la.inv(S) if sys.n else S, np.eye(sys.m))
    wnorm = op_norm2(S_out @ sys.matrix @ S_in_inv)
    return PHReport(residual <= slack, residual, wnorm, slack)


def _riccati_iterate(sys, eps, tol, max_iters, rel_tol):
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m = sys.n, sys.m
    X = herm(C.conj().T @ C) + eps * np.eye(n)
    base = D.conj().T @ D
    for _ in range(max_iters):
        R = np.eye(m) - base - herm(B.conj().T @ X @ B)
        try:
            Rc = la.cholesky(herm(R), lower=True)
        except la.LinAlgError:
            return None, "inverted block I - D^H D - B^H X B is not positive definite"
        L = B.conj().T @ X @ A + D.conj().T @ C
        Y = la.solve_triangular(Rc, L, lower=True)
        X_new = herm(A.conj().T @ X @ A + C.conj().T @ C + Y.conj().T @ Y) + eps * np.eye(n)
        if not np.all(np.isfinite(X_new)) or np.linalg.norm(X_new) > 1e12:
            return None, "Riccati iteration diverged"
        change = np.linalg.norm(X_new - X)
        X = X_new
        if change <= rel_tol * max(1.0, np.linalg.norm(X)):
            return X, None
    return None, f"no convergence in {max_iters} iterations"


def find_storage_weight(sys, tol=DEFAULT_TOL, max_iters=20000, rel_tol=1e-13):
    """Search for ``X > 0`` making `sys` scattering port-Hamiltonian.

    Candidates are tried in order: the identity, then the fixed point of
    the bounded-real Riccati recursion

        X <- A^H X A + C^H C + L^H (I - D^H D - B^H X B)^{-1} L + eps I,
        L = B^H X A + D^H C,

    started from ``C^H C + eps I``, for a decreasing sequence of
    regularizations ``eps`` ending at zero.  A candidate is returned only
    if it passes :func:`is_scattering_ph`.

    Raises
    ------
    NotFound
        With the reason the last candidate failed.
    """
    if sys.n == 0:
        X = np.zeros((0, 0))
        if is_scattering_ph(sys, X, tol).ok:
            return StorageWeight(X)
        raise NotFound("feedthrough D is not a contraction")
    if is_scattering_ph(sys, np.eye(sys.n), tol).ok:
        return StorageWeight(np.eye(sys.n))
    scale = 1.0 + op_norm2(sys.C) ** 2
    reason = "no candidate tried"
    for eps in (1e-2, 1e-4, 1e-6, 1e-8, 0.0):
        X, why = _riccati_iterate(sys, eps * scale, tol, max_iters, rel_tol)
        if X is None:
            reason = why
            continue
        try:
            if is_scattering_ph(sys, X, tol).ok:
                return StorageWeight(X)
            reason = "Riccati fixed point fails the weighted LMI"
        except NotPositiveDefinite:
            reason = "Riccati fixed point is not positive definite"
    raise NotFound(reason)
