import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdiffmap import classical_dm as cdm
from qdiffmap.dataset import DataSet
from qdiffmap.errors import ParameterError

from conftest import random_dataset


def system(X):
    ks = cdm.transition_matrix(cdm.kernel_matrix(X))
    return ks, cdm.eigendecompose(ks)


def test_identical_points_kernel():
    ks = cdm.kernel_matrix(DataSet(np.zeros((2, 3))))
    np.testing.assert_array_equal(ks.W, np.ones((2, 2)))
    np.testing.assert_array_equal(ks.D, [2, 2])


def test_closed_form_off_diagonal():
    ks = cdm.kernel_matrix(DataSet(np.array([[0.0], [np.sqrt(2)]])))
    assert ks.W[0, 1] == pytest.approx(0.36787944117144233, abs=1e-15)


def test_kernel_matches_double_loop():
    X = random_dataset(5, d=3, seed=4)
    W = cdm.kernel_matrix(X).W
    ref = np.empty((5, 5))
    for i in range(5):
        for j in range(5):
            diff = X.points[i] - X.points[j]
            ref[i, j] = np.exp(-0.5 * float(diff @ diff))
    np.testing.assert_allclose(W, ref, atol=1e-14, rtol=0)


def test_two_point_transition_and_spectrum():
    X = DataSet(np.array([[0.0], [1.3]]))
    ks, es = system(X)
    k = ks.W[0, 1]
    expected = np.array([[1, k], [k, 1]]) / (1 + k)
    np.testing.assert_allclose(ks.P, expected, atol=1e-15)
    np.testing.assert_allclose(es.lambdas, [1, (1 - k) / (1 + k)], atol=1e-14)


def test_eigenvalues_of_p_and_s_agree():
    ks, _ = system(random_dataset(6, seed=7))
    a = np.sort(np.linalg.eigvals(ks.P).real)
    b = np.sort(np.linalg.eigvalsh(ks.S))
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_eigensystem_properties():
    ks, es = system(random_dataset(10, seed=8))
    assert es.lambdas[0] == pytest.approx(1.0, abs=1e-10)
    assert np.all(es.lambdas >= -1e-10) and np.all(es.lambdas <= 1 + 1e-10)
    assert np.sum(np.isclose(es.lambdas, 1.0, atol=1e-10)) == 1
    np.testing.assert_allclose(ks.P @ es.right_vecs, es.right_vecs * es.lambdas, atol=1e-8)
    np.testing.assert_allclose(es.left_vecs.T @ ks.P, (es.left_vecs * es.lambdas).T, atol=1e-8)
    np.testing.assert_allclose(es.left_vecs.T @ es.right_vecs, np.eye(10), atol=1e-8)
    np.testing.assert_allclose(es.right_vecs[:, 0], 1.0, atol=1e-10)
    assert es.left_vecs[:, 0].sum() == pytest.approx(1.0, abs=1e-12)


def test_sign_convention():
    _, es = system(random_dataset(7, seed=9))
    idx = np.argmax(np.abs(es.psi), axis=0)
    assert np.all(es.psi[idx, np.arange(7)] > 0)


def test_diffusion_map_columns():
    _, es = system(random_dataset(8, seed=10))
    emb0 = cdm.diffusion_map(es, 0, 3)
    np.testing.assert_array_equal(emb0.coords, es.right_vecs[:, 1:4])
    emb2 = cdm.diffusion_map(es, 2, 3)
    np.testing.assert_allclose(emb2.coords, es.right_vecs[:, 1:4] * es.lambdas[1:4] ** 2)


def test_diffusion_map_decays_in_t():
    _, es = system(random_dataset(8, seed=11))
    norms = [np.abs(cdm.diffusion_map(es, t, 2).coords).max() for t in range(0, 40, 5)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-3 * norms[0]


def test_diffusion_map_bounds():
    _, es = system(random_dataset(5, seed=1))
    with pytest.raises(ParameterError):
        cdm.diffusion_map(es, 1, 5)
    with pytest.raises(ParameterError):
        cdm.diffusion_map(es, -1, 2)


def test_two_point_diffusion_distance():
    X = DataSet(np.array([[0.0], [0.7]]))
    ks, es = system(X)
    u0 = es.left_vecs[:, 0]
    ref = abs(ks.P[0, 0] - ks.P[1, 0]) * np.sqrt(1 / u0[0] + 1 / u0[1])
    assert cdm.diffusion_distance(ks, es, 0, 1, 1) == pytest.approx(ref, abs=1e-14)
    assert cdm.diffusion_distance(ks, es, 1, 1, 3) == 0.0
    assert cdm.verify_embedding_identity(ks, es, 1) <= 1e-12


def test_distance_equals_embedding_distance():
    ks, es = system(random_dataset(8, seed=12))
    phi = cdm.diffusion_map(es, 2, 7).coords
    for i, j in [(0, 1), (2, 5), (3, 7)]:
        d = cdm.diffusion_distance(ks, es, i, j, 2)
        assert d == pytest.approx(np.linalg.norm(phi[i] - phi[j]), abs=1e-8)


def test_identity_on_identical_points():
    ks, es = system(DataSet(np.zeros((4, 2))))
    assert np.max(cdm.diffusion_distances_sq(ks, es, 1)) == 0.0
    assert cdm.verify_embedding_identity(ks, es, 1) <= 1e-12


@pytest.mark.parametrize("t", [1, 2, 5])
def test_identity_n32(t):
    ks, es = system(random_dataset(32, d=3, seed=13))
    assert cdm.verify_embedding_identity(ks, es, t) <= 1e-8


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(3, 20), t=st.integers(0, 8))
def test_power_matches_spectral_sum(seed, n, t):
    ks, es = system(random_dataset(n, seed=seed))
    Pt = cdm.transition_power(ks.P, t)
    spectral = (es.right_vecs * es.lambdas**t) @ es.left_vecs.T
    np.testing.assert_allclose(Pt, spectral, atol=1e-8)
    np.testing.assert_allclose(ks.P.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(ks.D >= 1) and np.all(ks.D <= n)
