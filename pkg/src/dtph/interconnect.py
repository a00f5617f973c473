"""Interconnection of two scattering passive systems.

Each system splits its ports as ``u = (u^1, u^2)``, ``y = (y^1, y^2)``;
the first parts are coupled through a relation ``M`` on
``(u1^1, u2^1, y1^1, y2^1)``.  When every member satisfies
``|(u1^1, u2^1)| <= |(y1^1, y2^1)|`` the coupling absorbs at least as
much power as it returns, and the composite is scattering passive with
storage ``V1 + V2``.

The Redheffer coupling ``y1^1 = u2^1, u1^1 = y2^1`` is norm preserving;
for ``E1 = E2 = I`` the coupled ports can be eliminated when
``I - D1^11 D2^11`` is invertible, giving a standard system that is
scattering pH with weight ``diag(X1, X2)``.

All closed forms here are checked against :func:`elimination_oracle`,
which solves the coupled equations step by step.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as la

from .errors import (CouplingSingular, DimensionError, FeedbackSingular, IndexTooHigh,
                     Inconsistent, InconsistentStep, NonContractiveCoupling, NonUnique,
                     NonUniqueStep, NotIdentityE, PortMismatch)
from .linalg import (DEFAULT_TOL, as_matrix, as_vector, block_diag, hpd_sqrt, op_norm2,
                     rank_and_bases, solve_square)
from .subspace import classify, from_kernel
from .systems import (DescriptorSystem, StandardSystem, StorageWeight, Trajectory,
                      index_le_one, _weight_matrix)

__all__ = ["CouplingRelation", "ComposedDescriptor", "redheffer_coupling",
           "general_interconnect", "InvertibilityReport", "invertibility_tests",
           "redheffer_reduce", "ClosedLoopReport", "closed_loop",
           "closed_loop_printed", "CoupledTrajectory", "elimination_oracle",
           "compose_storage"]


@dataclass(frozen=True, eq=False)
class CouplingRelation:
    """Kernel form ``M11 u1 + M12 u2 + M21 y1 + M22 y2 = 0``.

    ``M11`` and ``M12`` act on the coupled inputs of systems 1 and 2,
    ``M21`` and ``M22`` on their coupled outputs.
    """

    M11: np.ndarray
    M12: np.ndarray
    M21: np.ndarray
    M22: np.ndarray
    mode: str = "general"

    def __post_init__(self):
        blocks = [as_matrix(getattr(self, k), k) for k in ("M11", "M12", "M21", "M22")]
        if len({b.shape[0] for b in blocks}) != 1:
            raise DimensionError("coupling blocks need equal row counts")
        for k, b in zip(("M11", "M12", "M21", "M22"), blocks):
            object.__setattr__(self, k, b)

    @property
    def widths(self):
        """``(u1, u2, y1, y2)`` port widths."""
        return tuple(getattr(self, k).shape[1] for k in ("M11", "M12", "M21", "M22"))

    @property
    def rows(self):
        return self.M11.shape[0]

    def relation(self, tol=DEFAULT_TOL):
        """The induced subspace of pairs ``((u1, u2), (y1, y2))``."""
        return from_kernel(np.hstack([self.M11, self.M12]),
                           np.hstack([self.M21, self.M22]), tol)

    def scattering_relation(self, tol=DEFAULT_TOL):
        """Pairs ``((y1, y2), (u1, u2))``: the coupling read as a map from
        the waves leaving the systems to the waves entering them."""
        return from_kernel(np.hstack([self.M21, self.M22]),
                           np.hstack([self.M11, self.M12]), tol)

    def certificate(self, tol=DEFAULT_TOL):
        """Classification of :meth:`scattering_relation`.

        Its contractivity, ``|(u1, u2)| <= |(y1, y2)|``, is what makes
        ``V1 + V2`` a storage function of the composite.
        """
        return classify(self.scattering_relation(tol), tol)

    def is_contractive(self, tol=DEFAULT_TOL):
        return self.certificate(tol).contractive

    def is_output_contractive(self, tol=DEFAULT_TOL):
        """``|(y1, y2)| <= |(u1, u2)|`` on the relation (the reverse
        orientation); reported for reference only."""
        return classify(self.relation(tol), tol).contractive


def redheffer_coupling(k1, k2):
    """Kernel rows encoding ``y1^1 = u2^1`` and ``u1^1 = y2^1``.

    `k1` is the coupled width of system 1 (``u1^1`` and ``y1^1``), `k2`
    that of system 2; they must agree.
    """
    if k1 != k2:
        raise PortMismatch(f"Redheffer coupling needs equal coupled widths, got {k1} and {k2}")
    k = k1
    I, Z = np.eye(k), np.zeros((k, k))
    return CouplingRelation(M11=np.vstack([Z, I]), M12=np.vstack([-I, Z]),
                            M21=np.vstack([I, Z]), M22=np.vstack([Z, -I]), mode="redheffer")


def _as_descriptor(sys):
    return sys.as_descriptor() if isinstance(sys, StandardSystem) else sys


def _as_standard(sys, tol):
    if isinstance(sys, StandardSystem):
        return sys
    if not sys.has_identity_E(tol):
        raise NotIdentityE("closed-form reduction needs E = I")
    return sys.as_standard()


def _check_ports(sys1, sys2, M):
    for i, s in ((1, sys1), (2, sys2)):
        if s.m1 is None:
            raise PortMismatch(f"system {i} has no port partition")
    w = (sys1.m1, sys2.m1, sys1.m1, sys2.m1)
    if M.widths != w:
        raise PortMismatch(f"coupling widths {M.widths} do not match ports {w}")
    if M.rows != sys1.m1 + sys2.m1:
        raise PortMismatch(
            f"coupling has {M.rows} constraints, need {sys1.m1 + sys2.m1} "
            "(one per coupled input)")


@dataclass(frozen=True, eq=False)
class ComposedDescriptor:
    """Composite descriptor system on ``(x1, x2, u1^1, u2^1, y1^1, y2^1)``
    with external ports ``u = (u1^2, u2^2)``, ``y = (y1^2, y2^2)``."""

    system: DescriptorSystem
    blocks: dict = field(default_factory=dict)

    def split_state(self, x):
        return {name: x[..., sl] for name, sl in self.blocks.items()}


def general_interconnect(sys1, sys2, M, tol=DEFAULT_TOL, check_causal=True):
    """Assemble the composite descriptor system for a contractive coupling.

    The composite matrices are::

        E = diag(E1, E2, 0)
        A = [[A1, 0,  B1^1,  0,     0,  0 ],
             [0,  A2, 0,     B2^1,  0,  0 ],
             [C1^1, 0, D1^11, 0,    -I, 0 ],
             [0, C2^1, 0,    D2^11, 0,  -I],
             [0,  0,  M11,   M12,  M21, M22]]
        B = [[B1^2, 0], [0, B2^2], [D1^12, 0], [0, D2^12], [0, 0]]
        C = [[C1^2, 0, D1^21, 0, 0, 0], [0, C2^2, 0, D2^21, 0, 0]]
        D = diag(D1^22, D2^22)

    Raises
    ------
    PortMismatch, NonContractiveCoupling
        On incompatible widths or a coupling that is not contractive.
    IndexTooHigh
        If the composite is not causal (index above one).
    """
    s1, s2 = _as_descriptor(sys1), _as_descriptor(sys2)
    _check_ports(s1, s2, M)
    cert = M.certificate(tol)
    if not cert.contractive:
        raise NonContractiveCoupling(
            f"coupling relation is not contractive (min eig {cert.margins['contractive']:.3e})")
    n1, n2, k1, k2 = s1.n, s2.n, s1.m1, s2.m1
    B11, B12, C11, C12, D111, D112, D121, D122 = s1.blocks()
    B21, B22, C21, C22, D211, D212, D221, D222 = s2.blocks()
    e1, e2 = s1.m - k1, s2.m - k2
    o1, o2 = s1.p - k1, s2.p - k2

    def Z(r, c):
        return np.zeros((r, c))

    I1, I2 = np.eye(k1), np.eye(k2)
    A = np.block([
        [s1.A, Z(n1, n2), B11, Z(n1, k2), Z(n1, k1), Z(n1, k2)],
        [Z(n2, n1), s2.A, Z(n2, k1), B21, Z(n2, k1), Z(n2, k2)],
        [C11, Z(k1, n2), D111, Z(k1, k2), -I1, Z(k1, k2)],
        [Z(k2, n1), C21, Z(k2, k1), D211, Z(k2, k1), -I2],
        [Z(k1 + k2, n1), Z(k1 + k2, n2), M.M11, M.M12, M.M21, M.M22],
    ])
    B = np.block([
        [B12, Z(n1, e2)],
        [Z(n2, e1), B22],
        [D112, Z(k1, e2)],
        [Z(k2, e1), D212],
        [Z(k1 + k2, e1), Z(k1 + k2, e2)],
    ])
    C = np.block([
        [C12, Z(o1, n2), D121, Z(o1, k2), Z(o1, k1), Z(o1, k2)],
        [Z(o2, n1), C22, Z(o2, k1), D221, Z(o2, k1), Z(o2, k2)],
    ])
    D = block_diag(D122, D222)
    E = block_diag(s1.E, s2.E, Z(2 * (k1 + k2), 2 * (k1 + k2)))
    system = DescriptorSystem(E, A, B, C, D)
    offsets = np.cumsum([0, n1, n2, k1, k2, k1, k2])
    names = ("x1", "x2", "u1", "u2", "y1", "y2")
    blocks = {nm: slice(int(a), int(b)) for nm, a, b in zip(names, offsets[:-1], offsets[1:])}
    if check_causal:
        rep = index_le_one(E, A, tol)
        if not rep.ok:
            raise IndexTooHigh(
                "interconnection is not causal: composite pencil has index > 1 "
                f"(rank [E, A ker E] = {rep.rank_augmented} < {rep.n})")
    return ComposedDescriptor(system, blocks)


class InvertibilityReport(NamedTuple):
    """Ranks of ``I - D1 D2``, ``I - D2 D1`` and ``[[D1, -I], [-I, D2]]``."""

    invertible: bool
    rank_12: int
    rank_21: int
    rank_kernel: int
    size: int

    @property
    def agree(self):
        flags = {self.rank_12 == self.size, self.rank_21 == self.size,
                 self.rank_kernel == 2 * self.size}
        return len(flags) == 1


def invertibility_tests(D1, D2, tol=DEFAULT_TOL):
    """Evaluate the three equivalent invertibility conditions."""
    D1 = as_matrix(D1, "D1")
    D2 = as_matrix(D2, "D2")
    k = D1.shape[0]
    if D1.shape != (k, k) or D2.shape != (k, k):
        raise DimensionError(f"feedthrough blocks must be square and equal, got "
                             f"{D1.shape} and {D2.shape}")
    I = np.eye(k)
    scale = 1.0 + op_norm2(D1) * op_norm2(D2) if k else 1.0
    r12 = rank_and_bases(I - D1 @ D2, tol, scale)[0]
    r21 = rank_and_bases(I - D2 @ D1, tol, scale)[0]
    rk = rank_and_bases(np.block([[D1, -I], [-I, D2]]), tol, scale)[0]
    return InvertibilityReport(r12 == k, r12, r21, rk, k)


def redheffer_reduce(sys1, sys2, tol=DEFAULT_TOL):
    """Eliminate the Redheffer-coupled ports of two standard systems.

    With ``K = [[D1^11, -I], [-I, D2^11]]``, the coupled inputs are
    ``(u1^1, u2^1) = -K^{-1} (diag(C1^1, C2^1) x + diag(D1^12, D2^12) u)``
    and substitution gives::

        A = diag(A1, A2)     - diag(B1^1, B2^1)   K^{-1} diag(C1^1, C2^1)
        B = diag(B1^2, B2^2) - diag(B1^1, B2^1)   K^{-1} diag(D1^12, D2^12)
        C = diag(C1^2, C2^2) - diag(D1^21, D2^21) K^{-1} diag(C1^1, C2^1)
        D = diag(D1^22, D2^22) - diag(D1^21, D2^21) K^{-1} diag(D1^12, D2^12)

    Returns
    -------
    StandardSystem, InvertibilityReport
        The reduced system has state ``(x1, x2)``, input ``(u1^2, u2^2)``
        and output ``(y1^2, y2^2)``.

    Raises
    ------
    NotIdentityE, PortMismatch, CouplingSingular
    """
    s1, s2 = _as_standard(sys1, tol), _as_standard(sys2, tol)
    for i, s in ((1, s1), (2, s2)):
        if s.m1 is None:
            raise PortMismatch(f"system {i} has no port partition")
    if s1.m1 != s2.m1:
        raise PortMismatch(f"coupled widths differ: {s1.m1} and {s2.m1}")
    B11, B12, C11, C12, D111, D112, D121, D122 = s1.blocks()
    B21, B22, C21, C22, D211, D212, D221, D222 = s2.blocks()
    inv = invertibility_tests(D111, D211, tol)
    if not inv.invertible:
        raise CouplingSingular(
            f"I - D1^11 D2^11 is singular (rank {inv.rank_12} < {inv.size})",
            diagnostics=inv._asdict())
    k = s1.m1
    I = np.eye(k)
    K = np.block([[D111, -I], [-I, D211]])
    Cc = block_diag(C11, C21)
    Dc = block_diag(D112, D212)
    Bc = block_diag(B11, B21)
    Doc = block_diag(D121, D221)
    KC = la.solve(K, Cc) if K.size else np.zeros((0, Cc.shape[1]))
    KD = la.solve(K, Dc) if K.size else np.zeros((0, Dc.shape[1]))
    A = block_diag(s1.A, s2.A) - Bc @ KC
    B = block_diag(B12, B22) - Bc @ KD
    C = block_diag(C12, C22) - Doc @ KC
    D = block_diag(D122, D222) - Doc @ KD
    return StandardSystem(A, B, C, D), inv


def compose_storage(X1, X2):
    """Block diagonal weight ``diag(X1, X2)``."""
    return StorageWeight(block_diag(_weight_matrix(X1), _weight_matrix(X2)))


class ClosedLoopReport(NamedTuple):
    contractive: bool
    lmi_residual: float
    weighted_norm: float
    literal_ratio: float
    literal_contractive: bool


def closed_loop_printed(sys1, sys2):
    """Closed-loop matrix in the form ``A1 + B1 D2 (I - D1 D2)^{-1} C1`` etc.

    Kept as an independent cross-check of the elimination result.
    """
    A1, B1, C1, D1 = sys1.A, sys1.B, sys1.C, sys1.D
    A2, B2, C2, D2 = sys2.A, sys2.B, sys2.C, sys2.D
    F = la.inv(np.eye(D1.shape[0]) - D1 @ D2)
    return np.block([
        [A1 + B1 @ D2 @ F @ C1, B1 @ C2 + B1 @ D2 @ F @ D1 @ C2],
        [B2 @ F @ C1, A2 + B2 @ F @ D1 @ C2],
    ])


def closed_loop(sys1, sys2, X1, X2, tol=DEFAULT_TOL, samples=64, seed=0):
    """Full-port feedback ``u1 = y2``, ``u2 = y1``.

    Returns the closed-loop matrix ``Ahat`` and a :class:`ClosedLoopReport`
    with the largest eigenvalue of ``Ahat^H X Ahat - X`` (``X =
    diag(X1, X2)``), the norm ``|| X^½ Ahat X^-½ ||`` and, for reference,
    the largest ratio ``|X Ahat z| / |X z|`` over `samples` random vectors.

    Raises
    ------
    FeedbackSingular
        If ``I - D1 D2`` is singular.
    """
    s1, s2 = _as_standard(sys1, tol), _as_standard(sys2, tol)
    if s1.m != s2.p or s2.m != s1.p or s1.m != s1.p:
        raise DimensionError("full-port feedback needs square, matching port widths")
    k = s1.m
    try:
        red, _ = redheffer_reduce(s1.with_partition(k), s2.with_partition(k), tol)
    except CouplingSingular as exc:
        raise FeedbackSingular(f"I - D1 D2 is singular: {exc}",
                               diagnostics=exc.diagnostics) from exc
    Ahat = red.A
    Xh = compose_storage(X1, X2).X
    n = Xh.shape[0]
    H = Ahat.conj().T @ Xh @ Ahat - Xh
    eigs = la.eigvalsh(0.5 * (H + H.conj().T)) if n else np.zeros(1)
    slack = tol.psd_slack(float(np.max(np.abs(eigs))))
    S = hpd_sqrt(Xh, tol) if n else Xh
    wnorm = op_norm2(S @ Ahat @ la.inv(S)) if n else 0.0
    rng = np.random.default_rng(seed)
    ratio = 0.0
    for _ in range(samples if n else 0):
        z = rng.standard_normal(n)
        if np.iscomplexobj(Ahat) or np.iscomplexobj(Xh):
            z = z + 1j * rng.standard_normal(n)
        ratio = max(ratio, np.linalg.norm(Xh @ Ahat @ z) / np.linalg.norm(Xh @ z))
    return Ahat, ClosedLoopReport(bool(eigs[-1] <= slack), float(eigs[-1]), wnorm,
                                  float(ratio), bool(ratio <= 1 + tol.residual_rtol))


@dataclass(eq=False)
class CoupledTrajectory(Trajectory):
    """Composite trajectory; ``states`` stacks ``(x1, x2)``, ``inputs`` and
    ``outputs`` the external ports.  The coupled signals are kept per
    step."""

    u1: np.ndarray = None
    u2: np.ndarray = None
    y1: np.ndarray = None
    y2: np.ndarray = None

    def subsystem(self, i, sys1, sys2):
        """Full input/output sequences of subsystem `i` (1 or 2)."""
        n1 = sys1.n
        e1 = sys1.m - sys1.m1
        o1 = sys1.p - sys1.m1
        if i == 1:
            x = self.states[:, :n1]
            u = np.hstack([self.u1, self.inputs[:, :e1]])
            y = np.hstack([self.y1, self.outputs[:, :o1]])
        else:
            x = self.states[:, n1:]
            u = np.hstack([self.u2, self.inputs[:, e1:]])
            y = np.hstack([self.y2, self.outputs[:, o1:]])
        return Trajectory(x, u, y, np.zeros(self.steps))


def elimination_oracle(sys1, sys2, coupling, inputs, x0s, tol=DEFAULT_TOL):
    """Simulate the coupled pair by solving the coupling equations anew at
    every step, without any closed-form reduction.

    At step ``k`` the unknowns ``(u1^1, u2^1, y1^1, y2^1)`` solve

        y1^1 = C1^1 x1 + D1^11 u1^1 + D1^12 u1^2
        y2^1 = C2^1 x2 + D2^11 u2^1 + D2^12 u2^2
        M11 u1^1 + M12 u2^1 + M21 y1^1 + M22 y2^1 = 0

    after which both systems are advanced independently.
    """
    s1, s2 = _as_standard(sys1, tol), _as_standard(sys2, tol)
    _check_ports(s1, s2, coupling)
    B11, B12, C11, C12, D111, D112, D121, D122 = s1.blocks()
    B21, B22, C21, C22, D211, D212, D221, D222 = s2.blocks()
    k1, k2 = s1.m1, s2.m1
    e1, e2 = s1.m - k1, s2.m - k2
    u = np.asarray(inputs)
    if u.ndim == 1:
        u = u.reshape(-1, e1 + e2)
    if u.shape[1] != e1 + e2:
        raise DimensionError(f"external inputs must have width {e1 + e2}, got {u.shape[1]}")
    N = u.shape[0]
    x1 = as_vector(x0s[0], s1.n, "x1")
    x2 = as_vector(x0s[1], s2.n, "x2")
    lhs = np.block([
        [D111, np.zeros((k1, k2)), -np.eye(k1), np.zeros((k1, k2))],
        [np.zeros((k2, k1)), D211, np.zeros((k2, k1)), -np.eye(k2)],
        [coupling.M11, coupling.M12, coupling.M21, coupling.M22],
    ])
    dtype = np.result_type(lhs, s1.A, s2.A, s1.B, s2.B, s1.C, s2.C, u, x1, x2)
    xs = np.zeros((N + 1, s1.n + s2.n), dtype=dtype)
    ys = np.zeros((N, s1.p - k1 + s2.p - k2), dtype=dtype)
    cu1 = np.zeros((N, k1), dtype=dtype)
    cu2 = np.zeros((N, k2), dtype=dtype)
    cy1 = np.zeros((N, k1), dtype=dtype)
    cy2 = np.zeros((N, k2), dtype=dtype)
    res = np.zeros(N)
    xs[0] = np.concatenate([x1, x2])
    for k in range(N):
        a, b = u[k, :e1], u[k, e1:]
        rhs = np.concatenate([-(C11 @ x1 + D112 @ a), -(C21 @ x2 + D212 @ b),
                              np.zeros(coupling.rows)])
        try:
            sol, _ = solve_square(lhs, rhs, tol)
        except NonUnique as exc:
            raise NonUniqueStep(f"coupled step {k}: {exc}", step=k,
                                kernel_dim=exc.kernel_dim) from exc
        except Inconsistent as exc:
            raise InconsistentStep(f"coupled step {k}: {exc}", step=k,
                                   residual=exc.residual) from exc
        v1, v2, w1, w2 = np.split(sol, np.cumsum([k1, k2, k1]))
        res[k] = np.linalg.norm(lhs @ sol - rhs)
        cu1[k], cu2[k], cy1[k], cy2[k] = v1, v2, w1, w2
        ys[k] = np.concatenate([C12 @ x1 + D121 @ v1 + D122 @ a,
                                C22 @ x2 + D221 @ v2 + D222 @ b])
        x1 = s1.A @ x1 + B11 @ v1 + B12 @ a
        x2 = s2.A @ x2 + B21 @ v2 + B22 @ b
        xs[k + 1] = np.concatenate([x1, x2])
    return CoupledTrajectory(xs, u, ys, res, u1=cu1, u2=cu2, y1=cy1, y2=cy2)
