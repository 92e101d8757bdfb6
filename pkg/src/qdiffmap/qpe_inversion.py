"""Phase estimation on the degree unitary and inversion of the degree matrix."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard

from .classical_dm import KernelSystem
from .errors import ParameterError, PhaseResolutionError
from .qlinalg import QuantumState, check_density
from .qmat import UDOperator, nearest_unitary

# probability on zero-decoding bins above which inversion is refused
ZERO_BIN_TOL = 1e-3


def qft_matrix(n_b: int) -> np.ndarray:
    dim = 2**n_b
    k = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)


def hadamard_matrix(n_b: int) -> np.ndarray:
    return hadamard(2**n_b).astype(complex) / np.sqrt(2**n_b)


def controlled_powers(U: np.ndarray, n_b: int) -> list[np.ndarray]:
    """[U, U^2, U^4, ..., U^(2^(n_b-1))] by repeated squaring."""
    out = [U]
    for _ in range(n_b - 1):
        out.append(nearest_unitary(out[-1] @ out[-1]))
    return out


class PhaseEstimator:
    """The QPE unitary (inverse QFT)(controlled U^j)(H^n) acting on phase (x) system.

    States are handled as (2^n_b, ..., dim) arrays: slice j holds the system
    amplitudes attached to phase-register value j. Axes in between are
    spectator registers untouched by U.
    """

    def __init__(self, U: np.ndarray, n_b: int):
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise ParameterError("U must be a square matrix")
        self.U = U
        self.n_b = n_b
        self.dim = U.shape[0]
        self.powers = controlled_powers(U, n_b)
        self.H = hadamard_matrix(n_b)
        self.F = qft_matrix(n_b)
        j = np.arange(2**n_b)
        self.rows = [np.nonzero((j >> k) & 1)[0] for k in range(n_b)]

    def _controlled(self, M, inverse=False):
        M = M.copy()
        for rows, Uk in zip(self.rows, self.powers):
            Ak = Uk.conj() if inverse else Uk.T
            M[rows] = M[rows] @ Ak
        return M

    @staticmethod
    def _on_phase(G, M):
        return np.tensordot(G, M, axes=(1, 0))

    def apply(self, M: np.ndarray) -> np.ndarray:
        M = self._on_phase(self.H, M)
        M = self._controlled(M)
        return self._on_phase(self.F.conj().T, M)

    def apply_inverse(self, M: np.ndarray) -> np.ndarray:
        M = self._on_phase(self.F, M)
        M = self._controlled(M, inverse=True)
        return self._on_phase(self.H, M)


def qpe(U: np.ndarray, psi: QuantumState, n_b: int) -> QuantumState:
    """Phase estimation with an n_b-bit register.

    ``psi`` is either the system state alone or a state whose leading
    register is the (all-zero) phase register.
    """
    dim = U.shape[0]
    shape = psi.register_shape
    if psi.amps.size == dim:
        sys_shape = shape
        M = np.zeros((2**n_b, dim), dtype=complex)
        M[0] = psi.amps
    elif shape[0] == 2**n_b and psi.amps.size == dim * 2**n_b:
        sys_shape = shape[1:]
        M = psi.amps.reshape(2**n_b, dim)
        if np.linalg.norm(M[1:]) > 1e-12:
            raise ParameterError("phase register must start in |0...0>")
    else:
        raise ParameterError(f"state of shape {shape} does not fit U of dimension {dim}")
    out = PhaseEstimator(U, n_b).apply(M)
    return QuantumState(out.reshape(-1), (2**n_b, *sys_shape))


def signed_bins(n_b: int) -> np.ndarray:
    """Two's-complement value of each phase bin."""
    b = np.arange(2**n_b)
    return np.where(b < 2 ** (n_b - 1), b, b - 2**n_b)


@dataclass
class PhaseConfig:
    """QPE settings for the degree inversion.

    ``t`` must match the U_D evolution time. ``C_check`` is the rotation
    constant (0 < C <= d_min); ``power`` selects the target D^{-power}
    (1 gives the inverse, 0.5 the inverse square root).
    """

    n_b: int
    t: float
    C_check: float = 1.0
    power: float = 1.0

    def __post_init__(self):
        if self.n_b < 3:
            raise ParameterError(f"n_b must be >= 3, got {self.n_b}")
        if not self.t > 0:
            raise ParameterError("t must be positive")
        if not self.C_check > 0:
            raise ParameterError("C_check must be positive")


def default_phase_time(n: int) -> float:
    """Largest U_D time keeping every degree (d < N) below phase 1/2."""
    return math.pi * n


def decoded_degrees(n_b: int, t: float, degree_factor: float) -> np.ndarray:
    """Degree magnitude |d~| represented by each phase bin."""
    return np.abs(signed_bins(n_b)) * 2 * np.pi / (2**n_b * t * degree_factor)


@dataclass
class InversionResult:
    rho_inv: np.ndarray
    success_prob: float
    aa_rounds: int
    kappa_D: float | None
    amplified_prob: float
    aa_trajectory: list = field(default_factory=list)
    norm_constant: float = 1.0
    power: float = 1.0
    phase_probs: np.ndarray | None = field(default=None, repr=False)


def condition_number(ks: KernelSystem) -> float:
    return float(ks.D.max() / ks.D.min())


def aa_rounds_for(p: float) -> int:
    """ceil(pi / (4 theta)) with sin(theta) = sqrt(p)."""
    if not 0 < p <= 1:
        raise ParameterError(f"success probability must lie in (0, 1], got {p}")
    return math.ceil(math.pi / (4 * math.asin(math.sqrt(p))))


def dilution_factor(p: float, rounds: int) -> float:
    """Amplitude multiplier taking sin(theta) = sqrt(p) to sin(pi / (2(2k+1))), k = rounds.

    With the good amplitude scaled by this factor, ``rounds`` Grover
    iterations rotate the state exactly onto the good subspace. The factor
    is <= 1 whenever rounds >= pi / (4 theta) - 1/2.
    """
    target = math.sin(math.pi / (2 * (2 * rounds + 1)))
    return min(1.0, target / math.sqrt(p))


def grover_trajectory(phi0: np.ndarray, good: np.ndarray, rounds: int) -> tuple[np.ndarray, list]:
    """Apply (2|phi0><phi0| - I)(I - 2 Pi_good) ``rounds`` times.

    Returns the final state and the good-subspace probability after each
    round (index 0 is the input).
    """
    state = phi0.copy()
    traj = [float(np.sum(np.abs(state[good]) ** 2))]
    for _ in range(rounds):
        state[good] *= -1
        state = 2 * phi0 * np.vdot(phi0, state) - state
        traj.append(float(np.sum(np.abs(state[good]) ** 2)))
    return state, traj


def degree_qpe_output(ud: UDOperator, n_b: int) -> np.ndarray:
    """QPE on U_D for the purified input, shape (2^n_b, reference, 3 N^2). Cached on ``ud``."""
    if n_b not in ud.cache:
        n = ud.n
        plus = np.array([1, 0, 1], dtype=complex) / np.sqrt(2)
        sys0 = np.zeros((n, 3, n, n), dtype=complex)
        for i in range(n):
            sys0[i, :, i, 0] = plus / np.sqrt(n)
        M = np.zeros((2**n_b, n, 3 * n * n), dtype=complex)
        M[0] = sys0.reshape(n, -1)
        ud.cache[n_b] = PhaseEstimator(ud.mat, n_b).apply(M)
    return ud.cache[n_b]


def invert_degree(ud: UDOperator, pc: PhaseConfig, kappa_D: float | None = None) -> InversionResult:
    """QPE on U_D, conditional rotation, amplitude amplification, post-selection.

    The rotation is scaled by ``dilution_factor`` before amplification so
    that the ceil(pi / (4 theta)) rounds land on the good subspace instead
    of overshooting; ``success_prob`` is the undiluted probability.

    The label register enters maximally mixed, purified by a reference
    register: a pure uniform label state would keep coherences between
    labels whose degrees land in the same bin. Registers are
    [ancilla, phase, reference, qutrit, label, Xi-ancilla]. The rotation is
    conditioned on the decoded magnitude |d~| of each bin, which covers
    both signs of the X_3 eigenvalues.
    """
    n, n_b = ud.n, pc.n_b
    if not np.isclose(pc.t, ud.t):
        raise ParameterError(f"PhaseConfig.t={pc.t} does not match U_D time {ud.t}")
    if ud.degree_factor * n * pc.t / (2 * np.pi) > 0.5 + 1e-12:
        raise ParameterError("t too large: degrees up to N would wrap past phase 1/2")

    M = degree_qpe_output(ud, n_b)
    phase_probs = np.sum(np.abs(M) ** 2, axis=(1, 2))

    dtil = decoded_degrees(n_b, pc.t, ud.degree_factor)
    zero_mass = phase_probs[dtil == 0].sum()
    if zero_mass > ZERO_BIN_TOL:
        raise PhaseResolutionError(
            f"{zero_mass:.3g} of the phase register decodes to d~ = 0", suggested_n_b=n_b + 2
        )
    with np.errstate(divide="ignore"):
        amp1 = np.sqrt(np.minimum(1.0, (pc.C_check / dtil) ** pc.power))
    p = float(np.sum(amp1**2 * phase_probs))
    rounds = aa_rounds_for(p)
    amp1 = amp1 * dilution_factor(p, rounds)
    amp0 = np.sqrt(1.0 - amp1**2)

    phi0 = np.concatenate([(amp0[:, None, None] * M).ravel(), (amp1[:, None, None] * M).ravel()])
    half = M.size
    good = np.zeros(phi0.size, dtype=bool)
    good[half:] = True
    state, traj = grover_trajectory(phi0, good, rounds)

    post = state[half:].reshape(2**n_b, n, 3, n, n)
    post = post / np.linalg.norm(post)
    rho = np.einsum("prqia,prqja->ij", post, post.conj())
    rho = 0.5 * (rho + rho.conj().T)
    rho = check_density(rho / np.trace(rho).real, tol=1e-8)
    norm_c = pc.C_check**pc.power / (n * p)
    return InversionResult(
        rho_inv=rho,
        success_prob=p,
        aa_rounds=rounds,
        kappa_D=kappa_D,
        amplified_prob=max(traj),
        aa_trajectory=traj,
        norm_constant=norm_c,
        power=pc.power,
        phase_probs=phase_probs,
    )


def inverse_degree_oracle(D: np.ndarray, power: float = 1.0) -> np.ndarray:
    """C~ sum_i d_i^{-power} |i><i| with unit trace."""
    w = D ** (-power)
    return np.diag(w / w.sum()).astype(complex)
