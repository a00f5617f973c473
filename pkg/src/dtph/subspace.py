"""Linear relations (subspaces of K^p x K^q).

A :class:`Subspace` is stored in image form: the pairs ``(P z, Q z)`` for
all generator coefficients ``z``.  The generators are replaced by an
orthonormal basis of ``im [P; Q]`` on construction, so two subspaces that
are equal as sets have generators differing only by a unitary factor.

The Cayley transform used here is

    C_{a,b}(M) = {(v, w) : (a (v + w), b (v - w)) in M}

whose image representation is ``im [b P + a Q; b P - a Q]``.  Monotone
relations map to contractive ones when ``a * conj(b) > 0``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, Inconsistent, NonUnique, NotAGraph
from .linalg import DEFAULT_TOL, as_matrix, as_vector, is_psd, rank_and_bases, solve_square

__all__ = ["Subspace", "KernelRep", "ClassificationReport", "from_image",
           "from_kernel", "to_kernel", "contains", "classify", "cayley",
           "cayley_inverse", "compose", "as_graph", "graph", "flip"]


def _orth(g, tol):
    return rank_and_bases(g, tol)[1]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of K^p x K^q spanned by the columns of ``[P; Q]``.

    Use :func:`from_image`, :func:`from_kernel` or :func:`graph` to build
    one; the constructor expects already-orthonormal generators.
    """

    P: np.ndarray
    Q: np.ndarray

    @property
    def p(self):
        return self.P.shape[0]

    @property
    def q(self):
        return self.Q.shape[0]

    @property
    def dim(self):
        return self.P.shape[1]

    @property
    def basis(self):
        return np.vstack([self.P, self.Q])

    @property
    def is_complex(self):
        return np.iscomplexobj(self.P) or np.iscomplexobj(self.Q)

    def contains(self, v, w, tol=DEFAULT_TOL):
        return contains(self, v, w, tol)

    def issubset(self, other, tol=DEFAULT_TOL):
        """True iff every generator of `self` lies in `other`."""
        if (self.p, self.q) != (other.p, other.q):
            return False
        return all(contains(other, self.P[:, j], self.Q[:, j], tol) for j in range(self.dim))

    def same_as(self, other, tol=DEFAULT_TOL):
        """Set equality via mutual containment."""
        return (self.dim == other.dim and self.issubset(other, tol)
                and other.issubset(self, tol))

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"Subspace(p={self.p}, q={self.q}, dim={self.dim}, {kind})"


@dataclass(frozen=True, eq=False)
class KernelRep:
    """``M = {(v, w) : K1 v + K2 w = 0}`` with ``[K1, K2]`` of full row rank."""

    K1: np.ndarray
    K2: np.ndarray

    @property
    def rows(self):
        return self.K1.shape[0]


def from_image(P, Q, tol=DEFAULT_TOL):
    """Subspace ``im [P; Q]`` with canonical orthonormal generators."""
    P = as_matrix(P, "P")
    Q = as_matrix(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise DimensionError(
            f"P and Q need the same number of columns, got {P.shape[1]} and {Q.shape[1]}")
    p = P.shape[0]
    basis = _orth(np.vstack([P, Q]), tol)
    return Subspace(basis[:p], basis[p:])


def graph(T, tol=DEFAULT_TOL):
    """Graph ``{(v, T v)}`` of the linear map ``T``."""
    T = as_matrix(T, "T")
    return from_image(np.eye(T.shape[1], dtype=T.dtype), T, tol)


def flip(M):
    """Swap the two components: ``{(w, v) : (v, w) in M}``."""
    return Subspace(M.Q, M.P)


def to_kernel(M, tol=DEFAULT_TOL):
    """Kernel representation with orthonormal rows."""
    rank, _, kernel = rank_and_bases(M.basis.conj().T, tol, scale=1.0)
    K = kernel.conj().T
    return KernelRep(K[:, :M.p], K[:, M.p:])


def from_kernel(K1, K2, tol=DEFAULT_TOL):
    """Subspace ``ker [K1, K2]``.

    A kernel with zero rows (``K1`` of shape ``(0, p)``) gives the full
    space.
    """
    K1 = as_matrix(K1, "K1")
    K2 = as_matrix(K2, "K2")
    if K1.shape[0] != K2.shape[0]:
        raise DimensionError(
            f"K1 and K2 need the same number of rows, got {K1.shape[0]} and {K2.shape[0]}")
    p = K1.shape[1]
    _, _, kernel = rank_and_bases(np.hstack([K1, K2]), tol)
    return Subspace(kernel[:p], kernel[p:])


def contains(M, v, w, tol=DEFAULT_TOL):
    """True iff ``dist((v, w), M) <= residual_rtol * ||(v, w)||``."""
    x = np.concatenate([as_vector(v, M.p, "v"), as_vector(w, M.q, "w")])
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return True
    G = M.basis
    r = x - G @ (G.conj().T @ x)
    return bool(np.linalg.norm(r) <= tol.residual_rtol * nrm)


@dataclass
class ClassificationReport:
    """Structural flags of a relation.

    Flags that need ``p == q`` (monotone, dirac, lagrangian and all
    maximality flags) are ``None`` when the component dimensions differ.
    ``witnesses`` maps each failed property to a generator-coefficient
    vector ``z``; the offending pair is ``(P z, Q z)``.
    """

    dim: int
    p: int
    q: int
    contractive: bool
    norm_preserving: bool
    monotone: Optional[bool] = None
    dirac: Optional[bool] = None
    lagrangian: Optional[bool] = None
    maximal_contractive: Optional[bool] = None
    maximal_monotone: Optional[bool] = None
    maximal_norm_preserving: Optional[bool] = None
    margins: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    FLAGS = ("contractive", "norm_preserving", "monotone", "dirac", "lagrangian",
             "maximal_contractive", "maximal_monotone", "maximal_norm_preserving")

    def as_dict(self):
        d = {"dim": self.dim, "p": self.p, "q": self.q}
        d.update({k: getattr(self, k) for k in self.FLAGS})
        d["margins"] = dict(self.margins)
        d["witnesses"] = {k: _vec_to_json(z) for k, z in self.witnesses.items()}
        return d


def _vec_to_json(z):
    if np.iscomplexobj(z):
        return [[float(c.real), float(c.imag)] for c in z]
    return [float(c) for c in z]


def _eig_extreme(H, largest_abs=False):
    """Eigenpair of the Hermitian matrix ``H``: the smallest, or the one of
    largest magnitude."""
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    i = int(np.argmax(np.abs(w))) if largest_abs else 0
    return float(w[i]), V[:, i]


def _zero_test(H, tol):
    """Is the Hermitian matrix ``H`` zero up to PSD slack?  Returns
    (ok, largest |eig|, eigenvector)."""
    if H.shape[0] == 0:
        return True, 0.0, None
    lam, z = _eig_extreme(H, largest_abs=True)
    # slack relative to the (orthonormal) generator scale, which is 1
    return abs(lam) <= tol.psd_slack(1.0), abs(lam), z


def classify(M, tol=DEFAULT_TOL):
    """Classify a relation by Gram conditions on its generators.

    With generators ``(P, Q)``:

    - contractive      iff ``P^H P - Q^H Q >= 0``
    - norm preserving  iff ``P^H P - Q^H Q = 0``
    - monotone         iff ``Q^H P + P^H Q >= 0``
    - dirac            iff ``Q^H P + P^H Q = 0``
    - lagrangian       iff ``Q^H P = P^H Q``

    and the maximal variants additionally require ``dim == n``.
    """
    P, Q = M.P, M.Q
    d = M.dim
    gap = P.conj().T @ P - Q.conj().T @ Q
    rep = ClassificationReport(dim=d, p=M.p, q=M.q, contractive=True, norm_preserving=True)

    if d:
        psd = is_psd(gap, tol)
        rep.contractive = psd.ok
        rep.margins["contractive"] = psd.min_eig
        if not psd.ok:
            rep.witnesses["contractive"] = _eig_extreme(gap)[1]
        ok, size, z = _zero_test(gap, tol)
        rep.norm_preserving = ok
        rep.margins["norm_preserving"] = size
        if not ok:
            rep.witnesses["norm_preserving"] = z

    if M.p != M.q:
        return rep

    n = M.p
    rep.monotone = rep.dirac = rep.lagrangian = True
    if d:
        sym = Q.conj().T @ P + P.conj().T @ Q
        psd = is_psd(sym, tol)
        rep.monotone = psd.ok
        rep.margins["monotone"] = psd.min_eig
        if not psd.ok:
            rep.witnesses["monotone"] = _eig_extreme(sym)[1]
        ok, size, z = _zero_test(sym, tol)
        rep.dirac = ok
        rep.margins["dirac"] = size
        if not ok:
            rep.witnesses["dirac"] = z
        # Q^H P - P^H Q is skew-Hermitian; i times it is Hermitian
        skew = 1j * (Q.conj().T @ P - P.conj().T @ Q)
        ok, size, z = _zero_test(skew, tol)
        rep.lagrangian = ok
        rep.margins["lagrangian"] = size
        if not ok:
            rep.witnesses["lagrangian"] = z

    rep.maximal_contractive = rep.contractive and d == n
    rep.maximal_monotone = rep.monotone and d == n
    rep.maximal_norm_preserving = rep.norm_preserving and d == n
    return rep


def _check_params(M, alpha, beta):
    if M.p != M.q:
        raise DimensionError(f"Cayley transform needs p == q, got {M.p} and {M.q}")
    if alpha == 0 or beta == 0:
        raise ValueError("Cayley parameters must be nonzero")


def cayley(M, alpha=1.0, beta=1.0, tol=DEFAULT_TOL):
    """Cayley transform ``im [beta P + alpha Q; beta P - alpha Q]``."""
    _check_params(M, alpha, beta)
    return from_image(beta * M.P + alpha * M.Q, beta * M.P - alpha * M.Q, tol)


def cayley_inverse(M, alpha=1.0, beta=1.0, tol=DEFAULT_TOL):
    """Inverse of :func:`cayley`: ``cayley(cayley_inverse(M)) == M``.

    Generators ``(X, Y)`` of `M` map back to
    ``((X + Y) / (2 beta), (X - Y) / (2 alpha))``.
    """
    _check_params(M, alpha, beta)
    return from_image((M.P + M.Q) / (2 * beta), (M.P - M.Q) / (2 * alpha), tol)


def compose(M, L, tol=DEFAULT_TOL):
    """``M^{-1} L = {(z, w) : (w, v) in M and (z, v) in L for some v}``.

    `M` lives in K^a x K^n and `L` in K^b x K^n; the result lives in
    K^b x K^a.
    """
    if M.q != L.q:
        raise DimensionError(
            f"middle dimensions differ: M has q={M.q}, L has q={L.q}")
    # pairs of coefficients (zeta, eta) with Q_M zeta = Q_L eta
    _, _, ker = rank_and_bases(np.hstack([M.Q, -L.Q]), tol, scale=1.0)
    zeta, eta = ker[:M.dim], ker[M.dim:]
    return from_image(L.P @ eta, M.P @ zeta, tol)


def as_graph(M, tol=DEFAULT_TOL):
    """Matrix ``T`` with ``M = {(v, T v)}``.

    Raises
    ------
    NotAGraph
        If ``dim M != p`` or ``P`` is singular, i.e. ``M`` contains some
        ``(0, w)`` with ``w != 0`` or does not cover all of K^p.
    """
    if M.dim != M.p:
        raise NotAGraph(f"relation has dimension {M.dim}, a graph over K^{M.p} needs {M.p}")
    if M.p == 0:
        return np.zeros((M.q, 0), dtype=M.Q.dtype)
    try:
        # T P = Q  <=>  P^H T^H = Q^H
        TH, _ = solve_square(M.P.conj().T, M.Q.conj().T, tol)
    except (NonUnique, Inconsistent) as exc:
        raise NotAGraph(f"first generator block is singular: {exc}") from exc
    return TH.conj().T
