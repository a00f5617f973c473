"""Random test objects with known structure.

Every function takes a :class:`numpy.random.Generator`; nothing here
touches global random state.
"""

import numpy as np

from .linalg import psd_sqrt
from .systems import DescriptorSystem, StandardSystem

__all__ = ["gaussian", "unitary", "contraction", "hpd", "monotone_matrix",
           "skew_matrix", "scattering_ph", "index_one_descriptor",
           "index_two_pencil"]


def gaussian(rng, rows, cols, complex_=False):
    g = rng.standard_normal((rows, cols))
    if complex_:
        g = (g + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    return g


def unitary(rng, n, complex_=False):
    """Haar-distributed orthogonal / unitary matrix."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex if complex_ else float)
    q, r = np.linalg.qr(gaussian(rng, n, n, complex_))
    d = np.diag(r)
    return q * (d / np.abs(d))


def contraction(rng, rows, cols, norm=1.0, complex_=False, low=0.0):
    """Random matrix with singular values in ``[low * norm, norm]``; the
    largest equals `norm` exactly."""
    k = min(rows, cols)
    if k == 0:
        return np.zeros((rows, cols), dtype=complex if complex_ else float)
    s = norm * rng.uniform(low, 1.0, size=k)
    s[0] = norm
    U = unitary(rng, rows, complex_)[:, :k]
    V = unitary(rng, cols, complex_)[:, :k]
    return (U * s) @ V.conj().T


def hpd(rng, n, complex_=False, spread=1.0):
    """``G^H G + I`` scaled by `spread`; condition number stays moderate."""
    G = gaussian(rng, n, n, complex_)
    return spread * (G.conj().T @ G) / max(n, 1) + np.eye(n)


def skew_matrix(rng, n, complex_=False):
    G = gaussian(rng, n, n, complex_)
    return G - G.conj().T


def monotone_matrix(rng, n, complex_=False, damping=1.0):
    """``W = S + damping * K^H K`` with ``S`` skew, so ``W + W^H >= 0``."""
    K = gaussian(rng, n, n, complex_)
    return skew_matrix(rng, n, complex_) + damping * (K.conj().T @ K) / max(n, 1)


def scattering_ph(rng, n, m, p=None, norm=None, complex_=False, m1=None):
    """Standard system with a known storage weight.

    Draws a contraction ``T`` and an HPD ``X`` and returns
    ``diag(X^-½, I) T diag(X^½, I)`` together with ``X``.
    """
    p = m if p is None else p
    if norm is None:
        norm = rng.uniform(0.5, 0.999)
    T = contraction(rng, n + p, n + m, norm=norm, complex_=complex_, low=0.1)
    X = hpd(rng, n, complex_)
    S = psd_sqrt(X)
    S_inv = np.linalg.inv(S) if n else S
    G = T.copy()
    G[:n, :] = S_inv @ G[:n, :]
    G[:, :n] = G[:, :n] @ S
    return StandardSystem(G[:n, :n], G[:n, n:], G[n:, :n], G[n:, n:], m1), X


def index_one_descriptor(rng, n, r, m, p=None, complex_=False, stable=0.9):
    """Index-one descriptor system hidden behind unitary transforms.

    The reduced dynamics has spectral norm `stable`, so long simulations
    stay bounded.
    """
    p = m if p is None else p
    q = n - r
    A_red = contraction(rng, r, r, norm=stable, complex_=complex_)
    S = np.diag(rng.uniform(0.5, 2.0, size=r))
    A22 = np.eye(q) + 0.3 * contraction(rng, q, q, complex_=complex_)
    A12 = gaussian(rng, r, q, complex_)
    A21 = gaussian(rng, q, r, complex_)
    # makes S^-1 (A11 - A12 A22^-1 A21) equal A_red
    A11 = S @ A_red + A12 @ np.linalg.solve(A22, A21) if q else S @ A_red
    E_blk = np.zeros((n, n), dtype=A11.dtype)
    E_blk[:r, :r] = S
    A_blk = np.block([[A11, A12], [A21, A22]]) if q else A11
    U = unitary(rng, n, complex_)
    V = unitary(rng, n, complex_)
    E = U @ E_blk @ V.conj().T
    A = U @ A_blk @ V.conj().T
    B = gaussian(rng, n, m, complex_)
    C = gaussian(rng, p, n, complex_)
    D = gaussian(rng, p, m, complex_)
    return DescriptorSystem(E, A, B, C, D)


def index_two_pencil(rng, n, complex_=False):
    """Regular pencil ``(E, A)`` of index two: a 2x2 nilpotent block
    ``[[0, 1], [0, 0]]`` next to an invertible ``E`` part."""
    if n < 2:
        raise ValueError("an index-two pencil needs n >= 2")
    E_blk = np.zeros((n, n))
    E_blk[:n - 2, :n - 2] = np.eye(n - 2)
    E_blk[n - 2, n - 1] = 1.0
    A_blk = np.eye(n, dtype=complex if complex_ else float)
    A_blk[:n - 2, :n - 2] = gaussian(rng, n - 2, n - 2, complex_)
    U = unitary(rng, n, complex_)
    V = unitary(rng, n, complex_)
    return U @ E_blk @ V.conj().T, U @ A_blk @ V.conj().T
