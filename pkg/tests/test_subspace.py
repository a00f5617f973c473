import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtph.errors import DimensionError, NotAGraph
from dtph.random import contraction, gaussian, monotone_matrix, skew_matrix, unitary
from dtph.subspace import (as_graph, cayley, cayley_inverse, classify, compose, contains,
                           flip, from_image, from_kernel, graph, to_kernel)

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(1, 6)


def test_from_image_orthonormal_and_rank(rng):
    P = gaussian(rng, 4, 2) @ gaussian(rng, 2, 3)
    Q = gaussian(rng, 3, 2) @ gaussian(rng, 2, 3)
    M = from_image(P, Q)
    assert M.dim <= 3
    assert np.allclose(M.basis.conj().T @ M.basis, np.eye(M.dim))
    for j in range(3):
        assert contains(M, P[:, j], Q[:, j])


def test_from_image_shape_mismatch():
    with pytest.raises(DimensionError):
        from_image(np.eye(2), np.eye(3))


def test_contains_rejects_outside(rng):
    M = graph(np.eye(3))
    v = gaussian(rng, 3, 1)[:, 0]
    assert M.contains(v, v)
    assert not M.contains(v, -v)


def test_identity_graph_classification():
    rep = classify(graph(np.eye(3)))
    assert rep.contractive and rep.norm_preserving and rep.monotone and rep.lagrangian
    assert not rep.dirac
    assert rep.maximal_contractive and rep.maximal_monotone and rep.maximal_norm_preserving
    assert "dirac" in rep.witnesses


def test_skew_graph_is_dirac_not_lagrangian(rng):
    rep = classify(graph(skew_matrix(rng, 4)))
    assert rep.dirac and rep.monotone
    assert not rep.lagrangian


def test_hermitian_graph_is_lagrangian(rng):
    G = gaussian(rng, 4, 4, complex_=True)
    assert classify(graph(G + G.conj().T)).lagrangian


def test_non_square_relation_has_none_flags(rng):
    rep = classify(graph(0.5 * contraction(rng, 2, 3)))
    assert rep.contractive
    assert rep.monotone is None and rep.maximal_contractive is None


def test_witness_violates_contractivity(rng):
    M = graph(2.0 * unitary(rng, 3))
    rep = classify(M)
    z = rep.witnesses["contractive"]
    assert np.linalg.norm(M.Q @ z) > np.linalg.norm(M.P @ z)


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.booleans())
def test_classification_implications(seed, n, cplx):
    rng = np.random.default_rng(seed)
    M = from_image(gaussian(rng, n, n, cplx), gaussian(rng, n, n, cplx))
    for M in (M, graph(skew_matrix(rng, n, cplx)), graph(unitary(rng, n, cplx))):
        rep = classify(M)
        if rep.dirac:
            assert rep.monotone
        if rep.norm_preserving:
            assert rep.contractive


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.booleans())
def test_contractive_flag_matches_operator_norm(seed, n, cplx):
    rng = np.random.default_rng(seed)
    T = gaussian(rng, n, n, cplx)
    rep = classify(graph(T))
    norm = np.linalg.norm(T, 2)
    if abs(norm - 1) > 1e-6:
        assert rep.contractive == (norm < 1)


def test_kernel_round_trip(rng):
    M = from_image(gaussian(rng, 4, 2, True), gaussian(rng, 3, 2, True))
    K = to_kernel(M)
    assert np.allclose(K.K1 @ M.P + K.K2 @ M.Q, 0, atol=1e-12)
    assert from_kernel(K.K1, K.K2).same_as(M)


def test_flip_swaps_components(rng):
    T = gaussian(rng, 3, 3)
    assert flip(graph(T)).same_as(graph(np.linalg.inv(T)))


def test_cayley_of_identity_graph():
    S = cayley(graph(np.eye(2)), 1.0, 1.0)
    assert S.dim == 2
    assert np.allclose(S.Q, 0)


def test_cayley_graph_formula(rng):
    # the transformed relation is again a graph; check its defining pairs
    W = monotone_matrix(rng, 3)
    a, b = 0.7, 1.3
    S = cayley(graph(W), a, b)
    T = as_graph(S)
    # pairs (v, w) of S satisfy (a(v + w), b(v - w)) in graph(W)
    v = gaussian(rng, 3, 1)[:, 0]
    w = T @ v
    assert np.allclose(W @ (a * (v + w)), b * (v - w))


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.booleans(), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_cayley_round_trip(seed, n, cplx, a, b):
    rng = np.random.default_rng(seed)
    M = from_image(gaussian(rng, n, n, cplx), gaussian(rng, n, n, cplx))
    assert cayley_inverse(cayley(M, a, b), a, b).same_as(M)
    assert cayley(cayley_inverse(M, a, b), a, b).same_as(M)


def test_cayley_rejects_zero_parameters():
    with pytest.raises(ValueError):
        cayley(graph(np.eye(2)), 0.0, 1.0)


def test_compose_matches_matrix_product(rng):
    A = gaussian(rng, 3, 3)
    B = gaussian(rng, 3, 3)
    R = compose(graph(A), graph(B))
    assert R.same_as(graph(np.linalg.solve(A, B)))


def test_compose_with_identity_returns_L(rng):
    L = from_image(gaussian(rng, 3, 2), gaussian(rng, 3, 2))
    assert compose(graph(np.eye(3)), L).same_as(L)


def test_as_graph_round_trip_and_failure(rng):
    T = gaussian(rng, 2, 3, complex_=True)
    assert np.allclose(as_graph(graph(T)), T)
    with pytest.raises(NotAGraph):
        as_graph(flip(graph(np.zeros((2, 2)))))
