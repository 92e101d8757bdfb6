import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

from qdiffmap.classical_dm import kernel_matrix
from qdiffmap.dataset import (
    DataSet,
    gen_blobs,
    gen_toroidal_helix,
    gen_two_clusters,
    load_csv,
    scale_by_bandwidth,
)
from qdiffmap.errors import IngestionError, ParameterError


def test_helix_with_zero_tube_is_unit_circle():
    X = gen_toroidal_helix(4, major_radius=1.0, minor_radius=0.0, windings=1)
    expected = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=float)
    np.testing.assert_allclose(X.points, expected, atol=1e-12)


def test_helix_lies_on_torus():
    X = gen_toroidal_helix(100, 2.0, 0.5, 10)
    x, y, z = X.points.T
    np.testing.assert_allclose((np.hypot(x, y) - 2.0) ** 2 + z**2, 0.25, atol=1e-12)


def test_helix_consecutive_gaps_nearly_uniform():
    X = gen_toroidal_helix(100, 2.0, 0.5, 10)
    closed = np.vstack([X.points, X.points[:1]])
    gaps = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    assert gaps.max() / gaps.min() <= 1.10


def test_helix_is_deterministic():
    a = gen_toroidal_helix(30, seed=5)
    b = gen_toroidal_helix(30, seed=5)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.theta, b.theta)


def test_helix_jitter_uses_seed():
    a = gen_toroidal_helix(30, seed=1, jitter=0.01)
    b = gen_toroidal_helix(30, seed=2, jitter=0.01)
    assert not np.allclose(a.points, b.points)


def test_dataset_rejects_bad_shapes():
    with pytest.raises(ParameterError):
        DataSet(np.zeros((1, 2)))
    with pytest.raises(ParameterError):
        DataSet(np.array([[0.0, np.nan], [1.0, 1.0]]))
    with pytest.raises(ParameterError):
        DataSet(np.zeros((3, 2)), labels=[0, 1])


def test_blobs_and_two_clusters():
    X = gen_blobs([[0, 0], [5, 5]], [3, 4], seed=3)
    assert X.n == 7 and X.d == 2 and X.labels == [0, 0, 0, 1, 1, 1, 1]
    Y = gen_two_clusters()
    assert Y.n == 8 and Y.name == "two_clusters_n8"


def test_load_csv_small(tmp_path):
    f = tmp_path / "small.csv"
    f.write_text("a,b\n1,2\n3,4\n5,6\n")
    X = load_csv(f)
    assert (X.n, X.d) == (3, 2)
    np.testing.assert_array_equal(X.points[:, 1], [2, 4, 6])


def test_load_csv_wine_shape(tmp_path):
    rng = np.random.default_rng(0)
    cols = [f"f{k}" for k in range(13)]
    lines = [",".join(["class"] + cols)]
    for r in range(178):
        lines.append(",".join([str(r % 3)] + [f"{v:.4f}" for v in rng.random(13) * 100]))
    f = tmp_path / "wine.csv"
    f.write_text("\n".join(lines) + "\n")
    X = load_csv(f, label_column="class")
    assert (X.n, X.d) == (178, 13)
    assert X.labels[:3] == ["0", "1", "2"]
    Z = load_csv(f, label_column="class", standardize=True)
    np.testing.assert_allclose(Z.points.mean(axis=0), 0, atol=1e-12)
    S = scale_by_bandwidth(X, 50.0)
    np.testing.assert_allclose(pdist(S.points, "sqeuclidean") * 50, pdist(X.points, "sqeuclidean"), rtol=1e-12)


def test_load_csv_reports_bad_cell(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("a,b\n1,2\n3,x\n")
    with pytest.raises(IngestionError) as info:
        load_csv(f)
    assert info.value.row == 3 and info.value.column == "b"
    assert "row 3" in str(info.value)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        load_csv(tmp_path / "absent.csv")


def test_scale_identity_and_closed_form():
    X = DataSet(np.array([[0.0], [2.0]]))
    np.testing.assert_array_equal(scale_by_bandwidth(X, 1.0).points, X.points)
    Y = scale_by_bandwidth(X, 4.0)
    np.testing.assert_allclose(Y.points.ravel(), [0, 1])
    assert kernel_matrix(Y).W[0, 1] == pytest.approx(np.exp(-0.5), abs=1e-15)
    with pytest.raises(ParameterError):
        scale_by_bandwidth(X, 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), sigma=st.sampled_from([0.1, 1.0, 50.0]))
def test_scaling_matches_bandwidth_kernel(seed, sigma):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((6, 3)) * 3
    W = kernel_matrix(scale_by_bandwidth(DataSet(pts), sigma)).W
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    np.testing.assert_allclose(W, np.exp(-d2 / (2 * sigma)), atol=1e-12)
