"""Eigenpair extraction: QPE on the transition exponential, amplification, readout.

Two generators are supported. ``symmetrized`` simulates
X_3(D^{-1/2} K D^{-1/2}) up to scale, whose Hermitian-embedding phases are the
eigenvalues of P and whose |2> components are the orthonormal vectors psi_i.
``paper_faithful`` simulates X_3(D^{-1} K) up to scale; for non-constant
degrees its phases are the singular values of P, not its eigenvalues.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.signal import find_peaks

from .classical_dm import DiffusionEmbedding, fix_sign
from .errors import ExtractionError, ParameterError, PhaseResolutionError
from .qlinalg import QuantumState, embed_X, matexp, uniform_vector
from .qmat import (
    NESTED_REPEATS,
    ExactOperand,
    ProductOperand,
    QmatConfig,
    deviation,
)
from .qpe_inversion import PhaseEstimator, aa_rounds_for, dilution_factor, qpe

MODES = ("symmetrized", "paper_faithful")
# the transition exponential acts on only 3N dimensions, so a large m is cheap
DEFAULT_TRANSITION_M = 32_000
READOUTS = ("exact", "sampled")


@dataclass
class EigenExtractionConfig:
    """Settings for the eigen stage.

    ``shots`` phase-register measurements are drawn after amplification;
    ``anchor_shots`` unamplified ones locate the top eigenvalue. The top
    phase is steered onto grid bin round(top_phase * 2^(n_b-1)).
    """

    n_b: int = 8
    mode: str = "symmetrized"
    readout: str = "exact"
    samples_per_vector: int = 10_000
    seed: int = 0
    shots: int = 20_000
    anchor_shots: int = 20_000
    top_phase: float = 0.9
    min_hit_fraction: float = 0.01

    def __post_init__(self):
        if self.n_b < 4:
            raise ParameterError(f"n_b must be >= 4, got {self.n_b}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.readout not in READOUTS:
            raise ParameterError(f"readout must be one of {READOUTS}, got {self.readout!r}")
        if self.readout == "sampled" and self.samples_per_vector < 1:
            raise ParameterError("samples_per_vector must be >= 1 for sampled readout")
        if not 0 < self.top_phase < 1:
            raise ParameterError("top_phase must lie in (0, 1)")
        if self.shots < 1 or self.anchor_shots < 1:
            raise ParameterError("shot counts must be positive")

    @property
    def anchor_bin(self) -> int:
        return max(1, round(self.top_phase * 2 ** (self.n_b - 1)))


@dataclass
class QuantumEigenpair:
    lambda_est: float
    vec_est: np.ndarray
    hits: int
    bin: int = 0
    phase: float = 0.0
    grid_lambda: float = 0.0


@dataclass
class TransitionExponential:
    """e^{iX_3(G) t} for the simulated generator G (= scale * P or scale * S)."""

    mat: np.ndarray
    t: float
    mode: str
    generator: np.ndarray
    exact: bool
    deviation: float = 0.0
    eps_target: float = 0.0

    @property
    def n(self) -> int:
        return self.generator.shape[0]


def transition_generator(rho: np.ndarray, khat: np.ndarray, mode: str) -> np.ndarray:
    """rho K^ (paper_faithful) or rho K^ rho (symmetrized, rho ~ D^{-1/2})."""
    if mode == "paper_faithful":
        return rho @ khat
    if mode == "symmetrized":
        return rho @ khat @ rho
    raise ParameterError(f"unknown mode {mode!r}")


def build_transition_exponential(
    rho: np.ndarray,
    khat: np.ndarray,
    cfg: QmatConfig,
    mode: str = "symmetrized",
    exact: bool = False,
    nested_repeats: int = NESTED_REPEATS,
) -> TransitionExponential:
    """e^{iX_3(G) cfg.t} by QMAT multiplication of density-operator exponentials.

    ``rho`` is the inverted degree state: C D^{-1} for paper_faithful, or
    C D^{-1/2} for symmetrized, where it is applied on both sides.
    """
    if rho.shape != khat.shape:
        raise ParameterError(f"shape mismatch: {rho.shape} vs {khat.shape}")
    G = transition_generator(rho, khat, mode)
    U_exact = matexp(embed_X(3, G), cfg.t)
    if exact:
        return TransitionExponential(U_exact, cfg.t, mode, G, exact=True)
    if mode == "paper_faithful":
        op = ProductOperand(ExactOperand(rho), ExactOperand(khat), cfg.repeats)
    else:
        inner = ProductOperand(ExactOperand(khat), ExactOperand(rho), nested_repeats)
        op = ProductOperand(ExactOperand(rho), inner, cfg.repeats)
    U = op.exp(3, cfg.t)
    return TransitionExponential(
        U, cfg.t, mode, G, exact=False, deviation=deviation(U, U_exact), eps_target=cfg.eps_target
    )


def default_psi0(n: int) -> np.ndarray:
    """|0>_qutrit (x) uniform label state."""
    return np.kron(np.array([1, 0, 0], dtype=complex), uniform_vector(n))


def qpe_transition(U: np.ndarray, psi0: np.ndarray | QuantumState, n_b: int) -> QuantumState:
    """QPE with registers [phase, qutrit, label]."""
    if not isinstance(psi0, QuantumState):
        n = U.shape[0] // 3
        psi0 = QuantumState(psi0, (3, n))
    if psi0.amps.size != U.shape[0]:
        raise ParameterError(f"psi0 has {psi0.amps.size} amplitudes, U acts on {U.shape[0]}")
    return qpe(U, psi0, n_b)


def good_mask(n_b: int, n: int, exclude_bin: int | None = None) -> np.ndarray:
    """Marked set: phase bit 0 clear, qutrit |2>, top-eigenvalue bin excluded."""
    mask = np.zeros((2**n_b, 3, n), dtype=bool)
    mask[: 2 ** (n_b - 1), 2, :] = True
    if exclude_bin is not None:
        mask[exclude_bin] = False
    return mask


def uf_matrix(n_b: int, n: int, exclude_bin: int | None = None) -> np.ndarray:
    return np.diag(np.where(good_mask(n_b, n, exclude_bin).ravel(), -1.0, 1.0)).astype(complex)


def up_matrix(U: np.ndarray, psi0: np.ndarray, n_b: int) -> np.ndarray:
    """QPE (2|0,psi0><0,psi0| - I) QPE^dag as an explicit matrix (small systems only)."""
    est = PhaseEstimator(U, n_b)
    d = U.shape[0]
    dim = 2**n_b * d
    # basis column index as a spectator axis between phase and system
    E = np.eye(dim, dtype=complex).reshape(2**n_b, d, dim).transpose(0, 2, 1)
    Q = est.apply(E).transpose(0, 2, 1).reshape(dim, dim)
    z = np.zeros(dim, dtype=complex)
    z[: U.shape[0]] = psi0
    R = 2 * np.outer(z, z.conj()) - np.eye(dim)
    return Q @ R @ Q.conj().T


# marked probability treated as zero (rounding residue of an empty subspace)
MARKED_FLOOR = 1e-12


@dataclass
class AAResult:
    """Amplified state on registers [phase, qutrit, label, dilution qubit].

    The marked outcomes are ``good_mask`` with the dilution qubit reading 1.
    """

    state: QuantumState
    rounds: int
    theta: float
    prob_before: float
    prob_after: float
    trajectory: list = field(default_factory=list)
    dilution: float = 1.0


def amplitude_amplify_good(
    psi: QuantumState,
    U: np.ndarray,
    psi0: np.ndarray,
    n_b: int,
    exclude_bin: int | None = None,
    rounds: int | str = "auto",
    dilute: bool = True,
) -> AAResult:
    """Apply Q = U_P U_f to the post-QPE state.

    A dilution qubit prepared in sqrt(1-f^2)|0> + f|1> joins the input, and
    U_f marks good phase/qutrit outcomes only when it reads 1. With
    f = ``dilution_factor`` the marked amplitude after the auto round count
    is 1 up to phase-estimation leakage; ``dilute=False`` fixes f = 1 (plain
    amplification, which may overshoot). U_P is applied literally: inverse
    QPE, reflection about |0>|psi0>|dilution>, QPE.
    """
    n = U.shape[0] // 3
    mask = good_mask(n_b, n, exclude_bin)
    M = psi.amps.reshape(2**n_b, 3, n)
    p0 = float(np.sum(np.abs(M[mask]) ** 2))
    if p0 <= MARKED_FLOOR:
        raise ExtractionError(f"marked subspace carries probability {p0:.3g}; nothing to amplify")
    theta = math.asin(math.sqrt(min(p0, 1.0)))
    if rounds == "auto":
        rounds = aa_rounds_for(p0)
    if rounds < 0:
        raise ParameterError("rounds must be nonnegative")
    f = dilution_factor(p0, rounds) if dilute and rounds > 0 else 1.0
    c = math.sqrt(max(0.0, 1.0 - f * f))
    # dilution rotation R = [[c, -f], [f, c]] prepares R|0>
    R = np.array([[c, -f], [f, c]])

    est = PhaseEstimator(U, n_b)
    z = psi0 / np.linalg.norm(psi0)
    M = np.stack([c * M, f * M], axis=-1)
    good = np.zeros(M.shape, dtype=bool)
    good[..., 1] = mask
    traj = [float(np.sum(np.abs(M[good]) ** 2))]
    for _ in range(rounds):
        M[good] *= -1
        X = M @ R  # R^dag on the last axis (R is real)
        X = np.stack([est.apply_inverse(X[..., a].reshape(2**n_b, 3 * n)) for a in (0, 1)], axis=-1)
        overlap = np.vdot(z, X[0, :, 0])
        X = -X
        X[0, :, 0] += 2 * z * overlap
        X = np.stack([est.apply(X[..., a]) for a in (0, 1)], axis=-1)
        M = X.reshape(2**n_b, 3, n, 2) @ R.T
        traj.append(float(np.sum(np.abs(M[good]) ** 2)))
    state = QuantumState(M.ravel(), (2**n_b, 3, n, 2))
    return AAResult(state, rounds, theta, p0, traj[-1], traj, f)


def sample_eigenpair(psi_amp: QuantumState, rng) -> tuple[int, int, QuantumState | None]:
    """Measure the phase register, then the qutrit (and dilution qubit if present).

    Returns (phase bin, qutrit outcome, collapsed label state); the label
    state is None unless the qutrit read |2> and the dilution qubit 1.
    """
    rng = np.random.default_rng(rng)
    T = psi_amp.tensor()
    if T.ndim == 3:
        T = T[..., None]
    anc_good = T.shape[-1] - 1
    p_bin = np.sum(np.abs(T) ** 2, axis=(1, 2, 3))
    b = int(rng.choice(len(p_bin), p=p_bin / p_bin.sum()))
    p_qa = np.sum(np.abs(T[b]) ** 2, axis=1).ravel()
    k = int(rng.choice(p_qa.size, p=p_qa / p_qa.sum()))
    q, a = divmod(k, T.shape[-1])
    if q != 2 or a != anc_good:
        return b, q, None
    v = T[b, 2, :, a]
    return b, q, QuantumState(v / np.linalg.norm(v), (len(v),))


def good_hits(psi_amp: QuantumState, mask: np.ndarray, shots: int, rng) -> np.ndarray:
    """Per-bin count of shots that land in the marked set (bulk sampling)."""
    T = psi_amp.tensor()
    if T.ndim == mask.ndim + 1:
        full = np.zeros(T.shape, dtype=bool)
        full[..., -1] = mask
        mask = full
    p = np.abs(T) ** 2
    p = p.ravel() / p.sum()
    counts = rng.multinomial(shots, p).reshape(mask.shape)
    return np.where(mask, counts, 0).sum(axis=tuple(range(1, mask.ndim)))


def _dirichlet_offset(ratio: float, n_b: int) -> float:
    """Offset delta in (0, 1) whose Dirichlet-kernel probability ratio P(b)/P(b+1) is ``ratio``."""
    a = math.pi / 2**n_b
    target = math.sqrt(ratio)
    g = lambda d: math.sin(a * (1 - d)) / math.sin(a * d) - target
    return brentq(g, 1e-12, 1 - 1e-12)


def refine_phase(hits: np.ndarray, peak: int, n_b: int) -> float:
    """Sub-bin phase estimate from the peak bin and its stronger neighbour."""
    dim = 2**n_b
    lo, hi = hits[(peak - 1) % dim], hits[(peak + 1) % dim]
    side = 1 if hi >= lo else -1
    nb = hi if side == 1 else lo
    if nb == 0 or hits[peak] == 0:
        return peak / dim
    delta = _dirichlet_offset(hits[peak] / nb, n_b)
    return (peak + side * delta) / dim


def lobe(peak: int, dim: int) -> np.ndarray:
    """Main-lobe bins of a QPE peak: the peak and its two neighbours (circular)."""
    return np.array([(peak - 1) % dim, peak, (peak + 1) % dim])


def find_peak_bins(hits: np.ndarray, min_hits: int) -> list[int]:
    """Circular local maxima of a histogram whose main lobe holds >= ``min_hits``.

    A single phase gives counts falling off monotonically on both sides of
    its peak, so a sum of phases has local maxima only at the peaks; the
    lobe threshold discards shot-noise maxima in the tails.
    """
    dim = hits.size
    padded = np.concatenate([hits[-1:], hits, hits[:1]])
    peaks = find_peaks(padded)[0] - 1
    return [int(p) for p in peaks if hits[lobe(p, dim)].sum() >= min_hits]


def strip_global_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real positive; return the real part."""
    k = np.argmax(np.abs(v))
    v = v * np.exp(-1j * np.angle(v[k]))
    return v.real / np.linalg.norm(v.real)


def read_out_vector(collapsed: QuantumState, cfg: EigenExtractionConfig, rng=None) -> tuple[np.ndarray, list]:
    """Real unit vector from the collapsed label state, plus readout warnings.

    ``exact`` copies amplitudes. ``sampled`` estimates magnitudes from
    computational-basis counts and signs from a Hadamard-test interference
    with the uniform state; components whose sign is below the shot-noise
    floor are zeroed.
    """
    a = strip_global_phase(collapsed.amps)
    if cfg.readout == "exact":
        return a, []
    rng = np.random.default_rng(rng)
    n = a.size
    s = cfg.samples_per_vector
    mag = np.sqrt(rng.multinomial(s, a**2 / np.sum(a**2)) / s)
    u = np.full(n, 1 / np.sqrt(n))
    # joint outcome (ancilla, k): |a_k +- u_k|^2 / 4
    p_int = np.concatenate([(a + u) ** 2, (a - u) ** 2]) / 4
    c = rng.multinomial(s, p_int / p_int.sum())
    diff = c[:n] - c[n:]
    noise = 2 * np.sqrt(c[:n] + c[n:])
    warn = []
    sign = np.sign(diff).astype(float)
    weak = np.abs(diff) <= noise
    if np.any(weak & (mag > 0)):
        idx = np.nonzero(weak & (mag > 0))[0].tolist()
        warn.append(f"sign unresolved for components {idx}; zeroed")
    est = np.where(weak, 0.0, sign * mag)
    nrm = np.linalg.norm(est)
    if nrm == 0:
        raise ExtractionError("readout produced an all-zero vector")
    return est / nrm, warn


def beta_overlaps(G: np.ndarray, psi0_label: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of a symmetric generator (descending) and overlaps with the input label state."""
    n = G.shape[0]
    if psi0_label is None:
        psi0_label = uniform_vector(n)
    lam, vecs = np.linalg.eigh(0.5 * (G + G.conj().T))
    order = np.argsort(-lam, kind="stable")
    lam, vecs = lam[order], fix_sign(vecs[:, order])
    return lam, vecs.conj().T @ psi0_label


def branch_peak_bins(texp: TransitionExponential, n_b: int, min_bins: float = 1.0) -> list[dict]:
    """Peak phase bin of QPE on each w_i+- of the simulated generator.

    Uses the singular vectors of G, which give the eigenvectors of X_3(G)
    in either mode. Pairs whose expected phase is below ``min_bins`` grid
    steps are skipped since their sign is not resolvable.
    """
    G = texp.generator
    n = G.shape[0]
    Uu, sv, Vh = np.linalg.svd(G)
    out = []
    for i, s in enumerate(sv):
        phase = texp.t * s / (2 * np.pi)
        if phase * 2**n_b < min_bins:
            continue
        row = {"index": i, "sigma": float(s), "phase": float(phase)}
        for name, sgn in (("pos", 1), ("neg", -1)):
            w = np.concatenate([Uu[:, i], np.zeros(n), sgn * Vh[i].conj()]) / np.sqrt(2)
            st = qpe(texp.mat, QuantumState(w, (3, n)), n_b)
            row[f"{name}_bin"] = int(np.argmax(st.probabilities(0)))
        out.append(row)
    return out


@dataclass
class ExtractionResult:
    pairs: list
    anchor_phase: float
    anchor_bin: int
    hits: np.ndarray
    aa: AAResult
    texp: TransitionExponential
    gain: float
    warnings: list = field(default_factory=list)
    calibration: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    post_qpe: QuantumState | None = field(default=None, repr=False)
    aa_draws: list = field(default_factory=list, repr=False)


def _top_peak_phase(hits, n_b, min_hits) -> float:
    half = 2 ** (n_b - 1)
    h = hits.copy()
    h[half:] = 0
    peaks = [p for p in find_peak_bins(h, min_hits) if p < half]
    if not peaks:
        raise PhaseResolutionError("no resolvable positive phase", suggested_n_b=n_b + 2)
    return refine_phase(h, max(peaks), n_b)


def random_psi0(n: int, rng) -> np.ndarray:
    """|0>_qutrit (x) a random real unit label state."""
    v = rng.standard_normal(n)
    return np.kron(np.array([1, 0, 0], dtype=complex), v / np.linalg.norm(v))


# relative singular value above which a bin's draws span another dimension
MULTIPLICITY_TOL = 0.3


def extract_eigenpairs(
    rho: np.ndarray,
    khat: np.ndarray,
    cfg: EigenExtractionConfig,
    scale: float,
    qmat_m: int = DEFAULT_TRANSITION_M,
    exact: bool = False,
    psi0: np.ndarray | None = None,
    min_pairs: int = 1,
    random_draws: int = 3,
    random_inputs: bool = False,
) -> ExtractionResult:
    """Run the whole eigen stage.

    ``scale`` is the ledger estimate of G / P (or G / S). The QPE time is
    pi * gain; a first pass at gain = 2 phi*/scale locates the top
    eigenvalue's phase, and the second pass rescales the gain so that it
    lands on the grid bin phi* = anchor_bin / 2^n_b. All eigenvalues are
    then read relative to that anchor.

    The input defaults to |0>|uniform>. When that reaches fewer than
    ``min_pairs`` eigenpairs (uniform degrees make every overlap beyond the
    first vanish), the stage is rerun with ``random_draws`` random inputs
    from a recorded seed; ``random_inputs=True`` goes straight to the random
    inputs (for callers that know some wanted overlap is negligible). The
    top-eigenvalue calibration always uses the uniform input. Across several
    draws, a bin whose collapsed vectors span k dimensions yields k
    eigenpairs (a degenerate eigenvalue).
    """
    rng = np.random.default_rng(cfg.seed)
    if psi0 is not None:
        return _extract([psi0], rho, khat, cfg, scale, qmat_m, exact, rng)
    n = khat.shape[0]
    if not random_inputs:
        res = _extract([default_psi0(n)], rho, khat, cfg, scale, qmat_m, exact, rng)
        if len(res.pairs) >= min_pairs:
            return res
        reason = f"uniform input reached {len(res.pairs)} eigenpair(s)"
    else:
        reason = "requested"
    seed = int(rng.integers(2**31))
    draw_rng = np.random.default_rng(seed)
    inputs = [random_psi0(n, draw_rng) for _ in range(random_draws)]
    retry = _extract(inputs, rho, khat, cfg, scale, qmat_m, exact, rng, anchor_input=default_psi0(n))
    retry.warnings.insert(0, f"{reason}; ran with {random_draws} random inputs (seed {seed})")
    retry.calibration["random_input_seed"] = seed
    return retry


def _extract(inputs, rho, khat, cfg, scale, qmat_m, exact, rng, anchor_input=None) -> ExtractionResult:
    n, n_b = khat.shape[0], cfg.n_b
    dim = 2**n_b
    target = cfg.anchor_bin / dim
    min_anchor = max(1, int(cfg.min_hit_fraction * cfg.anchor_shots))

    def anchor_pass(gain):
        texp = build_transition_exponential(
            rho, khat, QmatConfig(math.pi * gain, qmat_m), cfg.mode, exact=exact
        )
        st = qpe_transition(texp.mat, anchor_in, n_b)
        p = st.probabilities(0)
        counts = rng.multinomial(cfg.anchor_shots, p / p.sum())
        if counts[1 : dim // 2].sum() == 0:
            raise PhaseResolutionError(
                f"all phases below 2^-{n_b} at ledger scale {scale:.3g}", suggested_n_b=n_b + 2
            )
        return texp, st, _top_peak_phase(counts, n_b, min_anchor)

    anchor_in = inputs[0] if anchor_input is None else anchor_input
    clock = time.perf_counter()
    timings = {}
    gain0 = 2 * target / scale
    _, _, phi_a = anchor_pass(gain0)
    gain = gain0 * target / phi_a
    texp, st0, phi0 = anchor_pass(gain)
    calibration = {"gain0": gain0, "phase0": phi_a, "gain": gain, "phase": phi0, "target": target}
    timings["calibrated_qpe"] = time.perf_counter() - clock

    clock = time.perf_counter()
    mask = good_mask(n_b, n, cfg.anchor_bin)
    draws = []
    for k, psi0 in enumerate(inputs):
        st = st0 if psi0 is anchor_in else qpe_transition(texp.mat, psi0, n_b)
        aa = amplitude_amplify_good(st, texp.mat, psi0, n_b, exclude_bin=cfg.anchor_bin)
        draws.append((aa, good_hits(aa.state, mask, cfg.shots, rng)))
    hits = np.sum([h for _, h in draws], axis=0)
    total = int(hits.sum())
    if total == 0:
        raise ExtractionError("no shots landed in the marked subspace")
    peaks = find_peak_bins(hits, max(1, int(cfg.min_hit_fraction * total)))
    timings["amplify_and_sample"] = time.perf_counter() - clock

    clock = time.perf_counter()
    pairs, warn = [], []
    # peaks beside the excluded bin are leakage of the top eigenvalue
    near = [p for p in peaks if abs(p - cfg.anchor_bin) <= 1]
    if near:
        warn.append(f"dropped peak(s) {near} adjacent to the anchor bin {cfg.anchor_bin}")
        peaks = [p for p in peaks if abs(p - cfg.anchor_bin) > 1]
    for peak in peaks:
        run = lobe(peak, dim)
        phase = refine_phase(hits, peak, n_b)
        vecs = []
        for aa, h in draws:
            if h[run].sum() == 0:
                continue
            v = aa.state.tensor()[peak, 2, :, 1]
            vec, w = read_out_vector(QuantumState(v / np.linalg.norm(v), (n,)), cfg, rng)
            warn += [f"bin {peak}: {x}" for x in w]
            vecs.append(vec)
        _, sv, Vh = np.linalg.svd(np.array(vecs))
        mult = int(np.sum(sv >= MULTIPLICITY_TOL * sv[0]))
        for j in range(mult):
            pairs.append(
                QuantumEigenpair(
                    lambda_est=phase / phi0,
                    vec_est=Vh[j],
                    hits=int(hits[run].sum()) // mult,
                    bin=peak,
                    phase=phase,
                    grid_lambda=(peak / dim) / phi0,
                )
            )
    pairs.sort(key=lambda p: -p.lambda_est)
    timings["readout"] = time.perf_counter() - clock
    return ExtractionResult(
        pairs=pairs,
        anchor_phase=phi0,
        anchor_bin=cfg.anchor_bin,
        hits=hits,
        aa=draws[0][0],
        texp=texp,
        gain=gain,
        warnings=warn,
        calibration=calibration,
        timings=timings,
        post_qpe=st0,
        aa_draws=[aa for aa, _ in draws],
    )


def assemble_quantum_diffusion_map(
    pairs: list,
    t_steps: int,
    m: int,
    degrees: np.ndarray | None = None,
) -> DiffusionEmbedding:
    """Diffusion coordinates from extracted eigenpairs.

    ``degrees`` switches on the symmetrized conversion psi -> right
    eigenvector sqrt(sum d) D^{-1/2} psi, which uses classical degrees.
    """
    if len(pairs) < m:
        found = [p.bin for p in pairs]
        raise ExtractionError(f"need {m} eigenpairs, found {len(pairs)} at bins {found}")
    chosen = sorted(pairs, key=lambda p: -p.lambda_est)[:m]
    V = fix_sign(np.column_stack([p.vec_est for p in chosen]))
    if degrees is not None:
        V = np.sqrt(degrees.sum()) * V / np.sqrt(degrees)[:, None]
    lam = np.array([p.lambda_est for p in chosen])
    return DiffusionEmbedding(t_steps=t_steps, m=m, coords=V * lam**t_steps)
