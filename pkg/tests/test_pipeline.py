import json

import numpy as np
import pytest

from qdiffmap import pipeline as pl
from qdiffmap.classical_dm import DiffusionEmbedding
from qdiffmap.errors import CapacityError, ParameterError
from qdiffmap.qmat import QmatConfig

QUANTUM_STAGES = [
    "encode",
    "kernel_density",
    "ones_and_exponentials",
    "degree_unitary",
    "invert_degree",
    "transition_exponential",
    "qpe_transition",
    "amplify_and_measure",
    "readout",
]


@pytest.fixture(scope="module")
def two_cluster_report():
    cfg = pl.RunConfig()
    return cfg, pl.run_quantum(cfg)


def test_config_roundtrip():
    cfg = pl.RunConfig(dataset="helix", n=12, sigma=0.5, mode="paper_faithful", qmat_t_degree=3.0)
    assert pl.RunConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ParameterError):
        pl.RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ParameterError):
        pl.RunConfig(dataset="csv")
    with pytest.raises(ParameterError):
        pl.RunConfig(n_b=3)


def test_output_dir_override(monkeypatch, tmp_path):
    cfg = pl.RunConfig(output_dir="here")
    monkeypatch.delenv(pl.OUTPUT_ENV, raising=False)
    assert str(pl.output_dir(cfg)) == "here"
    monkeypatch.setenv(pl.OUTPUT_ENV, str(tmp_path))
    assert pl.output_dir(cfg) == tmp_path


def test_classical_helix_fragment():
    frag = pl.run_classical(pl.RunConfig(dataset="helix", n=100))
    coords = np.array(frag["embedding"])
    assert coords.shape == (100, 2)
    assert frag["identity_error"] <= 1e-8
    assert [s["name"] for s in frag["stages"]] == ["kernel", "transition", "eigendecompose", "diffusion_map"]


def test_classical_two_points():
    cfg = pl.RunConfig(dataset="blobs", n=2, m=1)
    X = pl.load_dataset(cfg)
    k = np.exp(-0.5 * np.sum((X.points[0] - X.points[1]) ** 2))
    frag = pl.run_classical(cfg, X)
    np.testing.assert_allclose(frag["lambdas"], [1, (1 - k) / (1 + k)], atol=1e-14)


def test_invalid_m_is_tagged():
    cfg = pl.RunConfig(dataset="blobs", n=4, m=4)
    with pytest.raises(ParameterError) as info:
        pl.run_classical(cfg)
    assert info.value.stage == "diffusion_map"


def test_capacity_checked_before_work():
    with pytest.raises(CapacityError):
        pl.run_quantum(pl.RunConfig(dataset="helix", n=64))


def test_quantum_stage_list(two_cluster_report):
    _, q = two_cluster_report
    assert [s["name"] for s in q["stages"]] == QUANTUM_STAGES
    assert [s["step"] for s in q["stages"]] == list(range(1, 10))
    for s in q["stages"]:
        assert s["errors"], s["name"]
        assert s["seconds"] >= 0


def test_quantum_two_cluster_metrics(two_cluster_report):
    _, q = two_cluster_report
    stages = {s["name"]: s["errors"] for s in q["stages"]}
    amp = stages["amplify_and_measure"]
    assert max(amp["eigenvalue_errors"]) <= amp["eigenvalue_budget"]
    assert q["comparison"]["max_deviation"] <= 1e-2
    assert stages["qpe_transition"]["sign_violations"] == 0
    assert stages["invert_degree"]["trace_distance"] <= 0.05
    assert q["flags"]["hybrid_degree_conversion"] is True


def test_quantum_four_point_blobs():
    cfg = pl.RunConfig(dataset="blobs", n=4, m=1, dataset_seed=3)
    q = pl.run_quantum(cfg)
    amp = q["stages"][7]["errors"]
    assert amp["eigenvalue_errors"]
    assert max(amp["eigenvalue_errors"]) <= amp["eigenvalue_budget"]


def test_paper_faithful_gap_table():
    q = pl.run_quantum(pl.RunConfig(mode="paper_faithful"))
    table = q["gap_table"]
    assert table
    assert any(r.get("gap_lambda", 0) > 0 for r in table)
    assert q["flags"]["hybrid_degree_conversion"] is False


def test_report_is_deterministic(tmp_path):
    cfg = pl.RunConfig(output_dir=str(tmp_path))
    texts = []
    for k in range(2):
        rep = pl.build_report(cfg, quantum=pl.run_quantum(cfg))
        texts.append(json.dumps(pl.strip_timings(rep), sort_keys=True))
    assert texts[0] == texts[1]


def test_write_outputs(tmp_path, two_cluster_report):
    cfg, q = two_cluster_report
    frag = pl.run_classical(cfg)
    scans = {"qmat": pl.scan_qmat_error([0.5, 1.0], [16, 32])}
    rep = pl.build_report(cfg, frag, q, scans)
    assert rep["schema_version"] == pl.SCHEMA_VERSION
    assert "_objects" not in rep["quantum"]
    paths = pl.write_outputs(tmp_path, rep)
    names = {p.name for p in paths}
    assert {"report.json", "embedding_classical.csv", "embedding_quantum.csv", "eigenpairs.csv", "qmat_scan.csv"} <= names
    loaded = json.loads((tmp_path / "report.json").read_text())
    assert loaded["config"]["dataset"] == "two_clusters"


def test_qmat_scan_slopes():
    res = pl.scan_qmat_error([0.25, 0.5, 1.0, 2.0], [16, 32, 64, 128])
    lo, hi = res["fits"]["m"]["ci"]
    assert -2.3 <= res["fits"]["m"]["slope"] <= -1.7 and lo <= res["fits"]["m"]["slope"] <= hi
    assert 2.5 <= res["fits"]["t"]["slope"] <= 3.5


def test_commuting_inputs_sit_at_floor():
    # X_1(A1) and X_2(A2) commute when A1 A2 = A2 A1 = 0
    A1 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    A2 = np.diag([0.0, 0.6, 0.4]).astype(complex)
    _, dev = pl.qmat_deviation(A1, A2, 1.0, 16)
    assert dev < 1e-13
    res = pl.scan_qmat_error([1.0], [16], floor=1.0)
    assert res["fits"] == {} and len(res["rows"]) == 2
    with pytest.raises(ParameterError):
        pl.scan_qmat_error([], [16])


def test_readout_scan_slope():
    res = pl.scan_readout([1000, 4000, 16000, 64000], repeats=10)
    assert -0.65 <= res["fit"]["slope"] <= -0.35


def emb(coords):
    coords = np.asarray(coords, dtype=float)
    return DiffusionEmbedding(t_steps=1, m=coords.shape[1], coords=coords)


def test_compare_identical_and_flipped():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((10, 2))
    same = pl.compare_embeddings(emb(A), emb(A))
    assert same["max_deviation"] == 0 and same["principal_angle"] < 1e-7
    assert same["distance_rank_correlation"] == pytest.approx(1.0)
    flipped = pl.compare_embeddings(emb(A), emb(A * [1, -1]))
    assert flipped["max_deviation"] == 0


def test_compare_random_and_mismatched():
    rng = np.random.default_rng(1)
    res = pl.compare_embeddings(emb(rng.standard_normal((16, 2))), emb(rng.standard_normal((16, 2))))
    assert np.isfinite(res["principal_angle"])
    with pytest.raises(ParameterError):
        pl.compare_embeddings(emb(np.zeros((4, 2))), emb(np.zeros((5, 2))))


def test_circular_rank_correlation():
    theta = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    assert pl.circular_rank_correlation(theta, np.mod(theta + 1.0, 2 * np.pi)) == pytest.approx(1.0)
    assert pl.circular_rank_correlation(theta, -theta) == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    assert pl.circular_rank_correlation(theta, rng.uniform(0, 2 * np.pi, 50)) < 0.5


def test_marked_shares():
    psi = np.linalg.qr(np.column_stack([np.ones(4), np.eye(4)[:, :3]]))[0]
    shares = pl.marked_shares(psi, 3)
    assert np.allclose(shares, 0.0, atol=1e-20)
    v = np.array([[0.5, 0.5, 0.5, 0.5], [0.5, 0.5, -0.5, -0.5]]).T
    # second vector orthogonal to uniform, so it gets no share
    assert pl.marked_shares(v, 1)[0] == pytest.approx(0.0, abs=1e-20)


def test_sampled_readout_end_to_end():
    q = pl.run_quantum(pl.RunConfig(readout="sampled", samples_per_vector=20_000))
    assert q["flags"]["exact_readout"] is False
    assert q["comparison"]["max_deviation"] <= 0.05
