import numpy as np
import pytest
from scipy.signal import cont2discrete

from dtph.errors import DimensionError, NotLagrangian, NotMonotone, NotScatteringPH, StepError
from dtph.geometric import (GeometricPH, dilate, discretize_dh, simulate, step,
                            step_relation, validate)
from dtph.linalg import psd_sqrt
from dtph.random import gaussian, hpd, monotone_matrix, scattering_ph, skew_matrix
from dtph.subspace import as_graph, classify, from_image, graph
from dtph.systems import StandardSystem, simulate_standard


def _swap():
    # n = 1, r = 0, m = 1: x+ = u and y = x
    U = np.array([[0.0, 1.0], [1.0, 0.0]])
    return GeometricPH(1, 0, 1, from_image(U, np.eye(2)), graph(np.zeros((0, 0))))


def test_swap_step():
    res = step(_swap(), [1.0], [2.0])
    assert res.x_next == pytest.approx([2.0])
    assert res.y == pytest.approx([1.0])
    assert res.power_residual < 1e-14


def test_dimension_checks():
    with pytest.raises(DimensionError):
        GeometricPH(1, 1, 1, graph(np.eye(2)), graph(np.zeros((1, 1))))


def test_validate_reports_problems(rng):
    sys, X = scattering_ph(rng, 2, 1)
    assert validate(dilate(sys, X)).ok
    bad = GeometricPH(1, 0, 1, graph(2 * np.eye(2)), graph(np.zeros((0, 0))))
    rep = validate(bad)
    assert not rep.ok and rep.messages


def test_step_failure_is_reported():
    # N = {(out, 0)}: no pair has a nonzero input side
    g = GeometricPH(1, 0, 1, from_image(np.eye(2), np.zeros((2, 2))), graph(np.zeros((0, 0))))
    with pytest.raises(StepError):
        simulate(g, [1.0], np.ones((3, 1)))


def test_dilation_reproduces_standard_simulation(rng):
    sys, X = scattering_ph(rng, 3, 2, complex_=True)
    g = dilate(sys, X)
    assert (g.n, g.r, g.m) == (3, 5, 2)
    rep = classify(g.N)
    assert rep.maximal_norm_preserving
    assert classify(g.C).maximal_contractive
    S = psd_sqrt(X)
    x0 = gaussian(rng, 3, 1, True)[:, 0]
    u = gaussian(rng, 40, 2, True)
    geo = simulate(g, S @ x0, u)
    std = simulate_standard(sys, x0, u)
    assert np.allclose(geo.outputs, std.outputs, atol=1e-10)
    assert np.allclose(geo.states, std.states @ S.T, atol=1e-10)
    assert geo.max_power_residual < 1e-10
    assert geo.min_margin >= -1e-10


def test_dilation_rejects_non_ph_system():
    sys = StandardSystem([[2.0]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(NotScatteringPH):
        dilate(sys, np.eye(1))


@pytest.mark.parametrize("h", [0.01, 0.5, 5.0])
def test_discretization_of_identity_hamiltonian_matches_bilinear(rng, h):
    W = monotone_matrix(rng, 4)
    S = discretize_dh(graph(W), None, h)
    assert classify(S).contractive
    Ad = cont2discrete((-np.linalg.inv(W), np.zeros((4, 1)), np.zeros((1, 4)),
                        np.zeros((1, 1))), h, method="bilinear")[0]
    assert np.allclose(as_graph(S), Ad, atol=1e-12)


def test_discretization_with_hamiltonian_weight(rng):
    W = monotone_matrix(rng, 3)
    H = hpd(rng, 3)
    h = 0.3
    S = discretize_dh(graph(W), graph(H), h)
    T = as_graph(S)
    Ad = cont2discrete((-np.linalg.solve(W, H), np.zeros((3, 1)), np.zeros((1, 3)),
                        np.zeros((1, 1))), h, method="bilinear")[0]
    assert np.allclose(T, Ad, atol=1e-12)
    # energy z^H H z does not increase
    lmi = T.conj().T @ H @ T - H
    assert np.max(np.linalg.eigvalsh(0.5 * (lmi + lmi.T))) <= 1e-10
    z = gaussian(rng, 3, 1)[:, 0]
    assert np.allclose(step_relation(S, z), T @ z)


def test_discretization_preconditions(rng):
    with pytest.raises(NotMonotone):
        discretize_dh(graph(-np.eye(2)), None, 0.1)
    with pytest.raises(NotLagrangian):
        discretize_dh(graph(np.eye(2)), graph(skew_matrix(rng, 2)), 0.1)
    with pytest.raises(ValueError):
        discretize_dh(graph(np.eye(2)), None, 0.0)
