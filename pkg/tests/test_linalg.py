import numpy as np
import pytest

from dtph.errors import DimensionError, Inconsistent, NonUnique, NotPositiveDefinite
from dtph.linalg import (DEFAULT_TOL, Tolerances, as_matrix, as_vector, hpd_sqrt,
                         is_psd, op_norm2, psd_sqrt, rank_and_bases, solve_square)
from dtph.random import gaussian, hpd


def test_tolerances_validation_and_override():
    with pytest.raises(ValueError):
        Tolerances(psd_atol=0.0)
    t = DEFAULT_TOL.with_(psd_atol=1e-6)
    assert t.psd_atol == 1e-6 and t.rank_rtol == DEFAULT_TOL.rank_rtol
    assert t.psd_slack(2.0) == pytest.approx(3e-6)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(DimensionError):
        as_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(DimensionError):
        as_vector(np.zeros(3), size=2)


def test_is_psd_boundary():
    assert is_psd(np.diag([1.0, 0.0]))
    rep = is_psd(np.diag([1.0, -1e-3]))
    assert not rep and rep.min_eig == pytest.approx(-1e-3)


def test_rank_and_bases_matches_numpy(rng):
    a = gaussian(rng, 6, 3) @ gaussian(rng, 3, 5)
    r, im, ker = rank_and_bases(a)
    assert r == np.linalg.matrix_rank(a) == 3
    assert np.allclose(im.T @ im, np.eye(3))
    assert np.allclose(a @ ker, 0, atol=1e-12)
    assert ker.shape == (5, 2)


def test_rank_scale_treats_roundoff_as_zero():
    tiny = np.array([[2e-16]])
    assert rank_and_bases(tiny)[0] == 1
    assert rank_and_bases(tiny, scale=1.0)[0] == 0


def test_sqrt_helpers(rng):
    X = hpd(rng, 4, complex_=True)
    S = hpd_sqrt(X)
    assert np.allclose(S @ S, X)
    assert np.allclose(psd_sqrt(X), S)
    with pytest.raises(NotPositiveDefinite):
        hpd_sqrt(np.diag([1.0, -1.0]))


def test_op_norm2(rng):
    a = gaussian(rng, 4, 7, complex_=True)
    assert op_norm2(a) == pytest.approx(np.linalg.norm(a, 2))


def test_solve_square_errors(rng):
    a = gaussian(rng, 4, 4)
    b = gaussian(rng, 4, 1)[:, 0]
    x, _ = solve_square(a, b)
    assert np.allclose(a @ x, b)
    sing = np.diag([1.0, 1.0, 0.0])
    with pytest.raises(NonUnique) as info:
        solve_square(sing, np.array([1.0, 2.0, 0.0]))
    assert info.value.kernel_dim == 1
    tall = np.vstack([np.eye(2), [[1.0, 1.0]]])
    with pytest.raises(Inconsistent):
        solve_square(tall, np.array([1.0, 1.0, 5.0]))
