"""Tolerance-aware dense linear algebra.

All rank and definiteness decisions in the package go through the
functions here, so that one :class:`Tolerances` value controls every
classification made during a run.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as la

from .errors import DimensionError, Inconsistent, NonUnique, NotPositiveDefinite

__all__ = ["Tolerances", "DEFAULT_TOL", "as_matrix", "as_vector", "herm",
           "PSDReport", "is_psd", "rank_and_bases", "hpd_sqrt", "psd_sqrt",
           "op_norm2", "solve_square", "block_diag", "eye_like"]


@dataclass(frozen=True)
class Tolerances:
    """Thresholds for rank, definiteness and residual decisions.

    Parameters
    ----------
    rank_rtol : float
        Singular values below ``rank_rtol * max(rows, cols) * sigma_max``
        count as zero.
    psd_atol : float
        A Hermitian matrix ``H`` is accepted as PSD when its smallest
        eigenvalue is at least ``-psd_atol * (1 + max|eig(H)|)``.
    residual_rtol : float
        Relative residual bound for linear solves and membership tests.
    """

    rank_rtol: float = 1e-10
    psd_atol: float = 1e-10
    residual_rtol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rtol", "psd_atol", "residual_rtol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def with_(self, **changes):
        d = {"rank_rtol": self.rank_rtol, "psd_atol": self.psd_atol,
             "residual_rtol": self.residual_rtol}
        d.update({k: v for k, v in changes.items() if v is not None})
        return Tolerances(**d)

    def rank_cutoff(self, shape, smax):
        return self.rank_rtol * max(shape + (1,)) * smax

    def psd_slack(self, spectral_radius):
        return self.psd_atol * (1.0 + spectral_radius)


DEFAULT_TOL = Tolerances()


def as_matrix(a, name="matrix"):
    """Return `a` as a finite 2-D float or complex array."""
    m = np.asarray(a)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.iscomplexobj(m):
        m = m.astype(float)
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def as_vector(v, size=None, name="vector"):
    x = np.asarray(v)
    if x.ndim == 0:
        x = x.reshape(1)
    x = x.reshape(-1)
    if not np.iscomplexobj(x):
        x = x.astype(float)
    if size is not None and x.shape[0] != size:
        raise DimensionError(f"{name} has length {x.shape[0]}, expected {size}")
    return x


def herm(h):
    """Hermitian part ``(H + H^H) / 2``."""
    return 0.5 * (h + h.conj().T)


def eye_like(n, *arrays):
    dtype = np.result_type(float, *[np.asarray(a).dtype for a in arrays])
    return np.eye(n, dtype=dtype)


def block_diag(*blocks):
    """Block diagonal matrix; empty blocks are allowed."""
    return la.block_diag(*[as_matrix(b) for b in blocks])


class PSDReport(NamedTuple):
    ok: bool
    min_eig: float
    slack: float

    def __bool__(self):
        return bool(self.ok)


def is_psd(h, tol=DEFAULT_TOL):
    """Decide whether the Hermitian part of `h` is positive semidefinite.

    Returns a :class:`PSDReport`, which is truthy iff the test passes.
    An empty matrix is PSD with ``min_eig = +inf``.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"is_psd needs a square matrix, got {h.shape}")
    if h.shape[0] == 0:
        return PSDReport(True, float("inf"), 0.0)
    eigs = la.eigvalsh(herm(h))
    slack = tol.psd_slack(float(np.max(np.abs(eigs))))
    lmin = float(eigs[0])
    return PSDReport(lmin >= -slack, lmin, slack)


def rank_and_bases(a, tol=DEFAULT_TOL, scale=None):
    """Numerical rank with orthonormal bases of the image and kernel.

    Singular values are compared against ``tol.rank_cutoff`` relative to
    ``max(sigma_max, scale)``.  Pass `scale` when the matrix is a
    difference or a block of quantities with a known size, so that a
    matrix that is zero up to roundoff is not judged to have full rank.

    Returns
    -------
    rank : int
    image : ndarray, shape (rows, rank)
    kernel : ndarray, shape (cols, cols - rank)
    """
    a = as_matrix(a)
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return 0, np.zeros((rows, 0), dtype=a.dtype), np.eye(cols, dtype=a.dtype)
    u, s, vh = la.svd(a, full_matrices=True)
    ref = s[0] if scale is None else max(s[0], float(scale))
    rank = int(np.sum(s > tol.rank_cutoff(a.shape, ref))) if ref > 0 else 0
    return rank, u[:, :rank], vh[rank:].conj().T


def psd_sqrt(x):
    """Hermitian square root of a PSD matrix, clipping roundoff negatives."""
    x = as_matrix(x)
    if x.shape[0] == 0:
        return x.copy()
    w, v = la.eigh(herm(x))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def hpd_sqrt(x, tol=DEFAULT_TOL):
    """Hermitian positive definite square root.

    Raises
    ------
    NotPositiveDefinite
        If the smallest eigenvalue of the Hermitian part is at most the
        PSD slack.
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"hpd_sqrt needs a square matrix, got {x.shape}")
    if x.shape[0] == 0:
        return x.copy()
    w, v = la.eigh(herm(x))
    if w[0] <= tol.psd_slack(float(np.max(np.abs(w)))):
        raise NotPositiveDefinite(
            f"matrix is not positive definite (min eigenvalue {w[0]:.3e})", float(w[0]))
    return (v * np.sqrt(w)) @ v.conj().T


def op_norm2(a):
    """Spectral norm (largest singular value); 0 for empty matrices."""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(la.svdvals(a)[0])


def solve_square(a, b, tol=DEFAULT_TOL):
    """Solve ``A x = b`` demanding existence and uniqueness.

    `A` need not be square; it must have full column rank and the system
    must be consistent.  The least-squares solution is returned together
    with a uniqueness flag (always ``True`` on return, since a nontrivial
    kernel raises).

    Raises
    ------
    NonUnique
        If ``A`` has a nontrivial kernel.
    Inconsistent
        If the residual exceeds ``residual_rtol * (||A|| ||x|| + ||b||)``.
    """
    a = as_matrix(a, "A")
    b_arr = np.asarray(b)
    vector_rhs = b_arr.ndim <= 1
    b2 = as_matrix(b_arr.reshape(-1, 1) if vector_rhs else b_arr, "b")
    if b2.shape[0] != a.shape[0]:
        raise DimensionError(f"A has {a.shape[0]} rows but b has {b2.shape[0]}")
    rank, _, kernel = rank_and_bases(a, tol)
    if rank < a.shape[1]:
        raise NonUnique(f"kernel of A has dimension {a.shape[1] - rank}",
                        a.shape[1] - rank)
    if a.shape[1] == 0:
        x = np.zeros((0, b2.shape[1]), dtype=np.result_type(a, b2))
    else:
        x = la.lstsq(a, b2)[0]
    anorm = op_norm2(a)
    residual = float(np.linalg.norm(a @ x - b2)) if a.shape[0] else 0.0
    bound = tol.residual_rtol * (anorm * float(np.linalg.norm(x)) + float(np.linalg.norm(b2)))
    if residual > bound:
        raise Inconsistent(f"residual {residual:.3e} exceeds bound {bound:.3e}",
                           residual, bound)
    if vector_rhs:
        x = x[:, 0]
    return x, True
