import numpy as np
import pytest
from scipy.signal import dlsim

from dtph.errors import (DimensionError, IndexTooHigh, InconsistentInitialState,
                         NotFound, NotPositiveDefinite, SingularPencil)
from dtph.random import (contraction, gaussian, index_one_descriptor, index_two_pencil,
                         scattering_ph)
from dtph.systems import (DescriptorSystem, StandardSystem, StorageWeight, check_dissipation,
                          find_storage_weight, index_le_one, is_scattering_ph,
                          reduce_to_standard, simulate_descriptor, simulate_standard)


def test_standard_system_shape_checks():
    with pytest.raises(DimensionError):
        StandardSystem(np.eye(2), np.zeros((3, 1)), np.zeros((1, 2)), np.zeros((1, 1)))
    with pytest.raises(DimensionError):
        StandardSystem(np.eye(2), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        StandardSystem(np.eye(2), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((1, 1)), m1=2)


def test_blocks_partition(rng):
    s = StandardSystem(np.eye(2), gaussian(rng, 2, 3), gaussian(rng, 3, 2),
                       gaussian(rng, 3, 3), m1=1)
    B1, B2, C1, C2, D11, D12, D21, D22 = s.blocks()
    assert B1.shape == (2, 1) and B2.shape == (2, 2)
    assert D11.shape == (1, 1) and D22.shape == (2, 2)


def test_storage_weight_validation():
    with pytest.raises(NotPositiveDefinite):
        StorageWeight(np.diag([1.0, -1.0]))
    W = StorageWeight(np.diag([2.0, 4.0]))
    assert W.hamiltonian(np.array([1.0, 1.0])) == pytest.approx(3.0)


def test_simulate_standard_matches_scipy(rng):
    s, _ = scattering_ph(rng, 4, 2)
    u = gaussian(rng, 30, 2)
    x0 = gaussian(rng, 4, 1)[:, 0]
    traj = simulate_standard(s, x0, u)
    _, y_ref, x_ref = dlsim((s.A, s.B, s.C, s.D, 1.0), u, x0=x0)
    assert np.allclose(traj.outputs, y_ref)
    assert np.allclose(traj.states[:-1], x_ref)


def test_zero_system_margin_is_zero():
    s = StandardSystem(np.zeros((1, 1)), np.zeros((1, 0)), np.zeros((1, 1)), np.zeros((1, 0)))
    traj = simulate_standard(s, np.zeros(1), np.zeros((10, 0)))
    assert check_dissipation(traj, np.eye(1)).min_margin == 0.0


def test_gain_two_violates_dissipation():
    s = StandardSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), 2 * np.eye(1))
    traj = simulate_standard(s, np.zeros(0), np.ones((5, 1)))
    rep = check_dissipation(traj, np.zeros((0, 0)))
    assert not rep.ok and rep.min_margin == pytest.approx(-3.0)


def test_known_witness_is_accepted_and_weighted_norm(rng):
    s, X = scattering_ph(rng, 3, 2, norm=0.8, complex_=True)
    rep = is_scattering_ph(s, X)
    assert rep.ok and rep.residual < 0
    assert rep.weighted_norm == pytest.approx(0.8)


def test_scalar_unstable_system_has_no_weight():
    s = StandardSystem([[2.0]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(NotFound):
        find_storage_weight(s)


def test_find_weight_when_identity_fails(rng):
    # a badly scaled known weight makes X = I fail; the Riccati route must succeed
    T = contraction(rng, 4, 4, norm=0.9)
    scale = np.diag([1.0, 30.0, 1.0])
    A = np.linalg.solve(scale, T[:3, :3] @ scale)
    B = np.linalg.solve(scale, T[:3, 3:])
    C = T[3:, :3] @ scale
    s = StandardSystem(A, B, C, T[3:, 3:])
    assert is_scattering_ph(s, scale @ scale).ok
    assert not is_scattering_ph(s, np.eye(3)).ok
    W = find_storage_weight(s)
    assert is_scattering_ph(s, W).ok


def test_storage_along_trajectory(rng):
    s, X = scattering_ph(rng, 4, 2)
    traj = simulate_standard(s, gaussian(rng, 4, 1)[:, 0], gaussian(rng, 50, 2))
    rep = check_dissipation(traj, X)
    assert rep.ok and rep.min_margin >= -1e-10


def test_index_checks(rng):
    d = index_one_descriptor(rng, 5, 3, 2)
    rep = index_le_one(d.E, d.A)
    assert rep.ok and rep.rank_E == 3
    E, A = index_two_pencil(rng, 4)
    assert not index_le_one(E, A).ok
    with pytest.raises(SingularPencil):
        index_le_one(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))


def test_reduction_of_invertible_E(rng):
    E = np.diag([2.0, 4.0])
    A = gaussian(rng, 2, 2)
    B = gaussian(rng, 2, 1)
    d = DescriptorSystem(E, A, B, np.eye(2), np.zeros((2, 1)))
    red, rec = reduce_to_standard(d)
    assert np.allclose(red.A, np.linalg.solve(E, A))
    assert np.allclose(rec.Phi, np.eye(2))


def test_descriptor_simulation_against_reduction(rng):
    d = index_one_descriptor(rng, 6, 4, 2, complex_=True)
    red, rec = reduce_to_standard(d)
    u = gaussian(rng, 40, 2, True)
    x0 = rec.full_state(gaussian(rng, 4, 1, True)[:, 0], u[0])
    ref = simulate_descriptor(d, x0, u)
    got = simulate_standard(red, rec.reduced_state(x0), u)
    assert np.allclose(got.outputs, ref.outputs, atol=1e-9)
    assert np.max(ref.residuals) < 1e-9


def test_descriptor_rejects_bad_initial_state_and_index(rng):
    d = index_one_descriptor(rng, 4, 2, 1)
    with pytest.raises(InconsistentInitialState):
        simulate_descriptor(d, np.ones(4), np.ones((3, 1)))
    E, A = index_two_pencil(rng, 3)
    d2 = DescriptorSystem(E, A, np.zeros((3, 1)), np.zeros((1, 3)), np.zeros((1, 1)))
    with pytest.raises(IndexTooHigh):
        simulate_descriptor(d2, np.zeros(3), np.zeros((2, 1)))
    with pytest.raises(IndexTooHigh):
        reduce_to_standard(d2)


def test_descriptor_margins_use_E(rng):
    # E x is what the storage sees: lift a scattering-pH system with E = 2I
    s, X = scattering_ph(rng, 3, 1)
    d = DescriptorSystem(2 * np.eye(3), 2 * s.A, 2 * s.B, s.C, s.D)
    traj = simulate_descriptor(d, np.ones(3), gaussian(rng, 20, 1))
    assert check_dissipation(traj, X / 4, d.E).ok


def test_contractive_feedthrough_only_system():
    s = StandardSystem(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)),
                       contraction(np.random.default_rng(0), 2, 2, norm=0.5))
    assert find_storage_weight(s).X.shape == (0, 0)
