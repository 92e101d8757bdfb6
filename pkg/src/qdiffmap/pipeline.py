"""Orchestration: configuration, classical and simulated runs, scans, reports."""
from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.linalg import subspace_angles
from scipy.spatial.distance import pdist

from . import classical_dm as cdm
from .dataset import (
    DataSet,
    gen_blobs,
    gen_toroidal_helix,
    gen_two_clusters,
    load_csv,
    scale_by_bandwidth,
)
from .errors import CapacityError, ParameterError, QDMError
from .qlinalg import QuantumState, all_ones_density, coherent_overlap, kernel_density, trace_distance
from .qmat import DEFAULT_CAP, QmatConfig, build_U_D, deviation, exact_exponential, qmat_multiply
from .qpe_eigen import (
    DEFAULT_TRANSITION_M,
    EigenExtractionConfig,
    assemble_quantum_diffusion_map,
    branch_peak_bins,
    extract_eigenpairs,
    read_out_vector,
)
from .qpe_inversion import (
    PhaseConfig,
    condition_number,
    default_phase_time,
    invert_degree,
    inverse_degree_oracle,
)

SCHEMA_VERSION = "1.0"
DATASETS = ("helix", "two_clusters", "blobs", "csv")
OUTPUT_ENV = "QDM_OUTPUT_DIR"


@dataclass
class RunConfig:
    dataset: str = "two_clusters"
    n: int = 8
    data_path: str | None = None
    label_column: str | None = None
    standardize: bool = False
    dataset_seed: int = 2
    sigma: float = 1.0
    t_steps: int = 1
    m: int = 2
    n_b: int = 8
    n_b_degree: int = 8
    qmat_t_degree: float | None = None
    qmat_m_degree: int = 4000
    qmat_m_transition: int = DEFAULT_TRANSITION_M
    mode: str = "symmetrized"
    readout: str = "exact"
    samples_per_vector: int = 10_000
    shots: int = 20_000
    exact_unitaries: bool = False
    c_check: float = 1.0
    seed: int = 0
    cap: int = DEFAULT_CAP
    output_dir: str = "qdm_out"

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ParameterError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.dataset == "csv" and not self.data_path:
            raise ParameterError("dataset 'csv' needs data_path")
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if self.t_steps < 0:
            raise ParameterError("t_steps must be nonnegative")
        if self.m < 1:
            raise ParameterError("m must be >= 1")
        if self.n_b_degree < 3:
            raise ParameterError("n_b_degree must be >= 3")
        if self.qmat_m_degree < 2 or self.qmat_m_transition < 2:
            raise ParameterError("QMAT m must be >= 2")
        if not self.c_check > 0:
            raise ParameterError("c_check must be positive")
        # validates n_b, mode, readout and samples
        self.eigen_config()

    def eigen_config(self, seed: int | None = None) -> EigenExtractionConfig:
        return EigenExtractionConfig(
            n_b=self.n_b,
            mode=self.mode,
            readout=self.readout,
            samples_per_vector=self.samples_per_vector,
            seed=self.seed if seed is None else seed,
            shots=self.shots,
            anchor_shots=self.shots,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def output_dir(cfg: RunConfig) -> Path:
    return Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)


def load_dataset(cfg: RunConfig) -> DataSet:
    if cfg.dataset == "helix":
        X = gen_toroidal_helix(cfg.n, seed=cfg.dataset_seed)
    elif cfg.dataset == "two_clusters":
        X = gen_two_clusters(seed=cfg.dataset_seed)
    elif cfg.dataset == "blobs":
        X = gen_blobs([[0.0, 0.0], [2.0, 0.0]], [cfg.n // 2, cfg.n - cfg.n // 2], seed=cfg.dataset_seed)
    else:
        X = load_csv(cfg.data_path, label_column=cfg.label_column, standardize=cfg.standardize)
    return scale_by_bandwidth(X, cfg.sigma)


def _seeds(root: int, k: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(root).spawn(k)]


class _Stage:
    """Context manager that times a stage and tags escaping errors with its name."""

    def __init__(self, log: list, step, name: str):
        self.entry = {"step": step, "name": name, "errors": {}}
        log.append(self.entry)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.entry["errors"]

    def __exit__(self, typ, exc, tb):
        self.entry["seconds"] = time.perf_counter() - self.t0
        if isinstance(exc, QDMError) and exc.stage is None:
            exc.stage = self.entry["name"]
        return False


@dataclass
class ClassicalRun:
    X: DataSet
    ks: cdm.KernelSystem
    es: cdm.EigenSystem
    emb: cdm.DiffusionEmbedding
    identity_error: float
    stages: list = field(default_factory=list)


def classical_run(X: DataSet, cfg: RunConfig) -> ClassicalRun:
    log: list = []
    with _Stage(log, 1, "kernel") as err:
        ks = cdm.kernel_matrix(X)
        err["symmetry"] = float(np.max(np.abs(ks.W - ks.W.T)))
    with _Stage(log, 2, "transition") as err:
        ks = cdm.transition_matrix(ks)
        err["row_sum"] = float(np.max(np.abs(ks.P.sum(axis=1) - 1)))
    with _Stage(log, 3, "eigendecompose") as err:
        es = cdm.eigendecompose(ks)
        err["residual"] = float(np.max(np.abs(ks.P @ es.right_vecs - es.right_vecs * es.lambdas)))
    with _Stage(log, 4, "diffusion_map") as err:
        emb = cdm.diffusion_map(es, cfg.t_steps, cfg.m)
        ident = cdm.verify_embedding_identity(ks, es, cfg.t_steps)
        err["identity"] = ident
    return ClassicalRun(X, ks, es, emb, ident, log)


def _fragment_classical(run: ClassicalRun) -> dict:
    return {
        "stages": run.stages,
        "lambdas": run.es.lambdas.tolist(),
        "embedding": run.emb.coords.tolist(),
        "identity_error": run.identity_error,
    }


def run_classical(cfg: RunConfig, X: DataSet | None = None) -> dict:
    X = load_dataset(cfg) if X is None else X
    return _fragment_classical(classical_run(X, cfg))


def compare_embeddings(classical: cdm.DiffusionEmbedding, quantum: cdm.DiffusionEmbedding) -> dict:
    A, B = np.asarray(classical.coords), np.asarray(quantum.coords)
    if A.shape != B.shape:
        raise ParameterError(f"embedding shapes differ: {A.shape} vs {B.shape}")
    signs = np.sign(np.sum(A * B, axis=0))
    signs[signs == 0] = 1.0
    B = B * signs
    dA, dB = pdist(A), pdist(B)
    if np.ptp(dA) == 0 or np.ptp(dB) == 0:
        rho = 1.0 if np.allclose(dA, dB) else 0.0
    else:
        rho = float(stats.spearmanr(dA, dB).statistic)
    return {
        "max_deviation": float(np.max(np.abs(A - B))),
        "column_deviation": np.max(np.abs(A - B), axis=0).tolist(),
        "principal_angle": float(np.max(subspace_angles(A, B))),
        "distance_rank_correlation": rho,
    }


def circular_rank_correlation(alpha, beta) -> float:
    """Rank correlation of two angle samples, in [0, 1], either orientation.

    Angles are replaced by uniform circular scores 2 pi rank / n; the
    statistic is |mean exp(i(a -+ b))|^2, maximised over the two
    orientations. A monotone circular map (any rotation) scores 1.
    """
    a, b = np.asarray(alpha, float), np.asarray(beta, float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 3:
        raise ParameterError("need two equal-length 1-D angle samples of size >= 3")
    n = a.size
    ga = 2 * np.pi * stats.rankdata(np.mod(a, 2 * np.pi)) / n
    gb = 2 * np.pi * stats.rankdata(np.mod(b, 2 * np.pi)) / n
    return float(max(abs(np.mean(np.exp(1j * (ga - gb)))), abs(np.mean(np.exp(1j * (ga + gb)))))) ** 2


def embedding_angle_correlation(coords, theta) -> float:
    """Circular rank correlation between atan2(phi_2, phi_1) and a known curve parameter."""
    coords = np.asarray(coords)
    return circular_rank_correlation(np.arctan2(coords[:, 1], coords[:, 0]), theta)


def coherent_kernel_error(X: DataSet, W: np.ndarray) -> float:
    """Largest gap between truncated coherent-state overlaps and the kernel."""
    pts = X.points
    n_max = int(60 + 3 * np.max(pts**2))
    worst = 0.0
    for i in range(X.n):
        for j in range(i, X.n):
            worst = max(worst, abs(coherent_overlap(pts[i], pts[j], n_max) - W[i, j]))
    return worst


def eigenvalue_budget(n_b: int, anchor_phase: float, qmat_dev: float) -> float:
    """Bin width plus QMAT phase error, both in anchored eigenvalue units."""
    return 2.0 ** (-n_b + 1) / (2 * anchor_phase) + qmat_dev / (2 * np.pi * anchor_phase)


# smallest share of the marked probability a wanted eigenpair may carry
# under the uniform input before the run switches to random inputs
MIN_MARKED_SHARE = 0.05


def marked_shares(vecs: np.ndarray, m: int) -> list[float]:
    """Share of the uniform input's non-top weight on each of eigenvectors 1..m (oracle check)."""
    n = vecs.shape[0]
    beta2 = (vecs.T @ np.full(n, 1 / np.sqrt(n))) ** 2
    rest = max(1.0 - beta2[0], 1e-300)
    return (beta2[1 : m + 1] / rest).tolist()


def _sign_align(v, ref):
    return v if np.dot(v, ref) >= 0 else -v


def run_quantum(cfg: RunConfig, X: DataSet | None = None, classical: ClassicalRun | None = None) -> dict:
    """Simulate the nine steps and log each against the classical oracle."""
    X = load_dataset(cfg) if X is None else X
    if X.n > cfg.cap:
        raise CapacityError(f"N={X.n} exceeds simulator cap {cfg.cap}")
    if classical is None:
        classical = classical_run(X, cfg)
    ks, es = classical.ks, classical.es
    n = X.n
    eig_seed = _seeds(cfg.seed, 1)[0]
    t_deg = cfg.qmat_t_degree or default_phase_time(n)
    log: list = []
    out: dict = {"stages": log, "flags": {}}

    with _Stage(log, 1, "encode") as err:
        err["coherent_overlap"] = coherent_kernel_error(X, ks.W)
    with _Stage(log, 2, "kernel_density") as err:
        khat = kernel_density(X)
        err["trace"] = abs(float(np.trace(khat).real) - 1)
        err["kernel_gap"] = float(np.max(np.abs(khat - ks.W / n)))
    with _Stage(log, 3, "ones_and_exponentials") as err:
        ones = all_ones_density(n)
        qc = QmatConfig(t_deg, cfg.qmat_m_degree)
        e1 = exact_exponential(khat, qc.step, 1)
        e2 = exact_exponential(ones, qc.step, 2)
        err["unitarity"] = max(
            float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))) for U in (e1, e2)
        )
    with _Stage(log, 4, "degree_unitary") as err:
        ud = build_U_D(X, qc, exact=cfg.exact_unitaries, cap=cfg.cap)
        err["deviation"] = ud.deviation
        err["eps_target"] = ud.eps_target
        err.update({f"stage_{k}": v for k, v in ud.stage_deviations.items()})
    with _Stage(log, 5, "invert_degree") as err:
        kappa = condition_number(ks)
        inv = invert_degree(ud, PhaseConfig(cfg.n_b_degree, t_deg, cfg.c_check, 1.0), kappa)
        err["trace_distance"] = trace_distance(inv.rho_inv, inverse_degree_oracle(ks.D, 1.0))
        err["norm_constant"] = abs(inv.norm_constant - 1 / np.sum(1 / ks.D))
        if cfg.mode == "symmetrized":
            half = invert_degree(ud, PhaseConfig(cfg.n_b_degree, t_deg, cfg.c_check, 0.5), kappa)
            err["trace_distance_half"] = trace_distance(half.rho_inv, inverse_degree_oracle(ks.D, 0.5))
            rho, scale = half.rho_inv, half.norm_constant**2 / n
        else:
            rho, scale = inv.rho_inv, inv.norm_constant / n
    out["inversion"] = {
        "kappa_D": kappa,
        "success_prob": inv.success_prob,
        "aa_rounds": inv.aa_rounds,
        "amplified_prob": inv.amplified_prob,
        "aa_trajectory": inv.aa_trajectory,
        "trace_distance": err["trace_distance"],
    }

    with _Stage(log, 6, "transition_exponential") as err:
        ecfg = cfg.eigen_config(eig_seed)
        shares = marked_shares(es.psi if cfg.mode == "symmetrized" else np.linalg.svd(ks.P)[2].T, cfg.m)
        weak = bool(np.min(shares) < MIN_MARKED_SHARE)
        err["marked_shares"] = shares
        ext = extract_eigenpairs(
            rho, khat, ecfg, scale, qmat_m=cfg.qmat_m_transition, exact=cfg.exact_unitaries,
            min_pairs=cfg.m, random_inputs=weak,
        )
        texp = ext.texp
        ref = texp.generator / scale
        oracle = ks.S if cfg.mode == "symmetrized" else ks.P
        err["deviation"] = texp.deviation
        err["generator_gap"] = float(np.max(np.abs(ref - oracle)))
        err["gain"] = ext.gain
        err["scale"] = scale
    with _Stage(log, 7, "qpe_transition") as err:
        p_bin = ext.post_qpe.probabilities(0)
        err["bit0_marginal"] = abs(float(p_bin[: 2 ** (cfg.n_b - 1)].sum()) - 0.5)
        branches = branch_peak_bins(texp, cfg.n_b)
        half_bins = 2 ** (cfg.n_b - 1)
        err["sign_violations"] = sum(
            (b["pos_bin"] >= half_bins) + (b["neg_bin"] < half_bins) for b in branches
        )
        err["anchor_phase_offset"] = abs(ext.anchor_phase - ext.anchor_bin / 2**cfg.n_b)
    with _Stage(log, 8, "amplify_and_measure") as err:
        if cfg.mode == "symmetrized":
            truth, vecs = es.lambdas, es.psi
        else:
            _, sv, vh = np.linalg.svd(ks.P)
            truth, vecs = sv / sv[0], vh.T
        # identify each extracted pair with the oracle vector it overlaps most
        matched = [int(np.argmax(np.abs(vecs.T @ p.vec_est))) for p in ext.pairs]
        lam_err = [abs(p.lambda_est - truth[i]) for p, i in zip(ext.pairs, matched)]
        err["matched_index"] = matched
        err["eigenvalue_errors"] = lam_err
        err["eigenvalue_budget"] = eigenvalue_budget(cfg.n_b, ext.anchor_phase, texp.deviation)
        err["aa_prob_after"] = ext.aa.prob_after
    with _Stage(log, 9, "readout") as err:
        l2 = [
            float(np.linalg.norm(_sign_align(p.vec_est, vecs[:, i]) - vecs[:, i]))
            for p, i in zip(ext.pairs, matched)
        ]
        err["vector_l2"] = l2
        err["warnings"] = ext.warnings
        degrees = ks.D if cfg.mode == "symmetrized" else None
        qemb = assemble_quantum_diffusion_map(ext.pairs, cfg.t_steps, cfg.m, degrees)

    out["flags"] = {
        "hybrid_degree_conversion": cfg.mode == "symmetrized",
        "exact_readout": cfg.readout == "exact",
        "exact_unitaries": cfg.exact_unitaries,
        "mode": cfg.mode,
        "random_inputs": "random_input_seed" in ext.calibration,
    }
    out["aa"] = {
        "rounds": ext.aa.rounds,
        "theta": ext.aa.theta,
        "prob_before": ext.aa.prob_before,
        "prob_after": ext.aa.prob_after,
        "dilution": ext.aa.dilution,
    }
    out["calibration"] = ext.calibration
    out["eigenpairs"] = [
        {
            "bin": p.bin,
            "phase": p.phase,
            "lambda": p.lambda_est,
            "grid_lambda": p.grid_lambda,
            "hits": p.hits,
            "vector": p.vec_est.tolist(),
        }
        for p in ext.pairs
    ]
    out["embedding"] = qemb.coords.tolist()
    out["comparison"] = compare_embeddings(classical.emb, qemb)
    out["comparison"]["eigenvalue_errors"] = lam_err
    out["comparison"]["vector_fidelity"] = [
        float(abs(np.dot(p.vec_est, vecs[:, i]))) for p, i in zip(ext.pairs, matched)
    ]
    out["timings_detail"] = ext.timings
    if cfg.mode == "paper_faithful":
        out["gap_table"] = singular_gap_table(ext, ks, scale)
    out["_objects"] = {"embedding": qemb, "extraction": ext, "inversion": inv}
    return out


def singular_gap_table(ext, ks: cdm.KernelSystem, scale: float) -> list[dict]:
    """Decoded phases against singular values and eigenvalues of P."""
    sv = np.linalg.svd(ks.P, compute_uv=False)
    lam = np.sort(np.linalg.eigvals(ks.P).real)[::-1]
    to_value = lambda phase: 2 * phase / (ext.gain * scale)
    rows = [{"index": 0, "decoded": to_value(ext.anchor_phase)}]
    rows += [{"index": i + 1, "decoded": to_value(p.phase)} for i, p in enumerate(ext.pairs)]
    for r in rows:
        i = r["index"]
        if i < len(sv):
            r.update(
                sigma=float(sv[i]),
                lam=float(lam[i]),
                gap_sigma=abs(r["decoded"] - sv[i]),
                gap_lambda=abs(r["decoded"] - lam[i]),
            )
    return rows


def _fit_slope(x, y):
    res = stats.linregress(np.log(x), np.log(y))
    half = stats.t.ppf(0.975, max(1, len(x) - 2)) * res.stderr
    return {"slope": float(res.slope), "ci": [float(res.slope - half), float(res.slope + half)]}


def random_generators(dim: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Two complex dim x dim matrices scaled to unit operator norm."""
    out = []
    for _ in range(2):
        A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        out.append(A / np.linalg.norm(A, 2))
    return out[0], out[1]


def qmat_deviation(A1, A2, t: float, m: int) -> tuple[int, float]:
    cfg = QmatConfig(t, m)
    U = qmat_multiply(exact_exponential(A1, cfg.step, 1), exact_exponential(A2, cfg.step, 2), cfg)
    return cfg.repeats, deviation(U, exact_exponential(A1 @ A2, t))


def scan_qmat_error(t_list, m_list, dims=(3,), seed: int = 0, floor: float = 1e-13,
                    t_fixed: float = 0.5, m_fixed: int = 64) -> dict:
    """Deviation grid: m scan at ``t_fixed`` and t scan at ``m_fixed`` per dimension.

    Rows with deviation below ``floor`` (commuting inputs) are kept in the
    table but excluded from the slope fits.
    """
    if not len(t_list) or not len(m_list):
        raise ParameterError("t_list and m_list must be nonempty")
    rng = np.random.default_rng(seed)
    rows = []
    for dim in dims:
        A1, A2 = random_generators(dim, rng)
        for m in m_list:
            nrep, dev = qmat_deviation(A1, A2, t_fixed, m)
            rows.append({"scan": "m", "dim": dim, "t": t_fixed, "m": m, "repeats": nrep, "deviation": dev})
        for t in t_list:
            nrep, dev = qmat_deviation(A1, A2, t, m_fixed)
            rows.append({"scan": "t", "dim": dim, "t": t, "m": m_fixed, "repeats": nrep, "deviation": dev})
    fits = {}
    for key in ("m", "t"):
        sel = [r for r in rows if r["scan"] == key and r["deviation"] > floor]
        if len(sel) >= 2:
            fits[key] = _fit_slope([r[key] for r in sel], [r["deviation"] for r in sel])
    return {"rows": rows, "fits": fits}


def scan_readout(sample_counts, vector=None, n: int = 8, repeats: int = 20, seed: int = 0) -> dict:
    """Mean l2 readout error against sample count, with log-log slope."""
    rng = np.random.default_rng(seed)
    if vector is None:
        vector = rng.standard_normal(n)
    vector = np.asarray(vector, dtype=float)
    vector = vector / np.linalg.norm(vector)
    # readout fixes the global sign by making the largest entry positive
    vector = vector * np.sign(vector[np.argmax(np.abs(vector))])
    state = QuantumState(vector, (vector.size,))
    rows = []
    for s in sample_counts:
        cfg = EigenExtractionConfig(readout="sampled", samples_per_vector=int(s))
        errs = [np.linalg.norm(read_out_vector(state, cfg, rng)[0] - vector) for _ in range(repeats)]
        rows.append({"samples": int(s), "l2_error": float(np.mean(errs))})
    fit = _fit_slope([r["samples"] for r in rows], [r["l2_error"] for r in rows])
    return {"rows": rows, "fit": fit}


# ---- report emission -------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def build_report(cfg: RunConfig, classical: dict | None = None, quantum: dict | None = None,
                 scans: dict | None = None) -> dict:
    report = {"schema_version": SCHEMA_VERSION, "config": asdict(cfg)}
    if classical is not None:
        report["classical"] = classical
    if quantum is not None:
        report["quantum"] = quantum
    if scans:
        report["scans"] = scans
    return _jsonable(report)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_outputs(outdir: Path, report: dict) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = [outdir / "report.json"]
    written[0].write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    for key, name in (("classical", "embedding_classical.csv"), ("quantum", "embedding_quantum.csv")):
        if key in report:
            coords = report[key]["embedding"]
            header = [f"phi{k + 1}" for k in range(len(coords[0]))]
            write_csv(outdir / name, header, coords)
            written.append(outdir / name)
    if "quantum" in report:
        pairs = report["quantum"]["eigenpairs"]
        write_csv(
            outdir / "eigenpairs.csv",
            ["index", "bin", "phase", "lambda", "hits", "vector_column"],
            [[i, p["bin"], p["phase"], p["lambda"], p["hits"], f"v{i}"] for i, p in enumerate(pairs)],
        )
        if pairs:
            n = len(pairs[0]["vector"])
            write_csv(
                outdir / "eigenvectors.csv",
                [f"v{i}" for i in range(len(pairs))],
                [[p["vector"][k] for p in pairs] for k in range(n)],
            )
            written.append(outdir / "eigenvectors.csv")
        written.append(outdir / "eigenpairs.csv")
    if "scans" in report and "qmat" in report["scans"]:
        rows = report["scans"]["qmat"]["rows"]
        write_csv(
            outdir / "qmat_scan.csv",
            ["scan", "dim", "t", "m", "repeats", "deviation"],
            [[r["scan"], r["dim"], r["t"], r["m"], r["repeats"], r["deviation"]] for r in rows],
        )
        written.append(outdir / "qmat_scan.csv")
    return written


def strip_timings(report: dict) -> dict:
    """Copy of a report without wall-clock fields, for determinism checks."""
    if isinstance(report, dict):
        return {
            k: strip_timings(v)
            for k, v in report.items()
            if k not in ("seconds", "timings_detail")
        }
    if isinstance(report, list):
        return [strip_timings(v) for v in report]
    return report
