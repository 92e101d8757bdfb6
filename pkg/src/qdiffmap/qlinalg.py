"""Dense complex linear algebra for the state-vector simulator.

Composite registers are always ordered as listed in ``register_shape``,
leftmost slowest-varying (C order), so ``amps.reshape(register_shape)``
exposes one tensor axis per register.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classical_dm import kernel_matrix
from .dataset import DataSet
from .errors import ParameterError

HERM_TOL = 1e-10


@dataclass
class QuantumState:
    amps: np.ndarray
    register_shape: tuple

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        self.register_shape = tuple(int(s) for s in self.register_shape)
        if math.prod(self.register_shape) != self.amps.size:
            raise ParameterError(
                f"register shape {self.register_shape} does not match {self.amps.size} amplitudes"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check(self, tol: float = HERM_TOL) -> "QuantumState":
        if abs(self.norm - 1.0) > tol:
            raise ParameterError(f"state not normalized (norm={self.norm:.12g})")
        return self

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.register_shape)

    def probabilities(self, register: int) -> np.ndarray:
        """Marginal outcome distribution of one register."""
        p = np.abs(self.tensor()) ** 2
        axes = tuple(k for k in range(len(self.register_shape)) if k != register)
        return p.sum(axis=axes)

    def reduced_density(self, keep: int) -> np.ndarray:
        """Reduced density matrix of register ``keep`` (others traced out)."""
        t = np.moveaxis(self.tensor(), keep, 0).reshape(self.register_shape[keep], -1)
        return t @ t.conj().T


def product_state(*factors, shape=None) -> QuantumState:
    amps = np.array([1.0 + 0j])
    for f in factors:
        amps = np.kron(amps, np.asarray(f, dtype=complex))
    if shape is None:
        shape = tuple(len(f) for f in factors)
    return QuantumState(amps, shape)


def basis_vector(dim: int, index: int = 0) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def uniform_vector(dim: int) -> np.ndarray:
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def is_hermitian(H: np.ndarray, tol: float = HERM_TOL) -> bool:
    return H.shape[0] == H.shape[1] and np.max(np.abs(H - H.conj().T), initial=0.0) <= tol


def check_unitary(U: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    dev = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if dev > tol:
        raise ParameterError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3g})")
    return U


def check_density(rho: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    if not is_hermitian(rho, tol):
        raise ParameterError("density operator is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ParameterError(f"density operator trace is {tr:.12g}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -tol:
        raise ParameterError(f"density operator has negative eigenvalue {lo:.3g}")
    return rho


def op_norm(A: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(A, ord=2))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(0.5 * ((rho - sigma) + (rho - sigma).conj().T))
    return 0.5 * float(np.sum(np.abs(ev)))


def coherent_overlap_truncated(x: float, y: float, n_max: int) -> float:
    """Fock-truncated overlap of two real single-mode coherent states.

    Terms are summed in log space so large |xy| does not overflow.
    """
    if n_max < 0:
        raise ParameterError(f"n_max must be >= 0, got {n_max}")
    prod = x * y
    pref = -(x * x + y * y) / 2.0
    if prod == 0.0:
        return math.exp(pref)
    n = np.arange(n_max + 1)
    logs = n * math.log(abs(prod)) - np.array([math.lgamma(k + 1) for k in n]) + pref
    signs = np.where((prod < 0) & (n % 2 == 1), -1.0, 1.0)
    return float(np.sum(signs * np.exp(logs)))


def coherent_overlap(x, y, n_max: int) -> float:
    """Multi-mode overlap: product of per-feature truncated overlaps."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(np.prod([coherent_overlap_truncated(a, b, n_max) for a, b in zip(x, y)]))


def kernel_density(X: DataSet) -> np.ndarray:
    """K/N: the label-space reduced state of the coherent-state superposition."""
    K = kernel_matrix(X).W
    return check_density(K / X.n + 0j)


def all_ones_density(n: int) -> np.ndarray:
    return np.full((n, n), 1.0 / n, dtype=complex)


_R = {
    1: (0, 1),
    2: (1, 2),
    3: (0, 2),
}


def qutrit_R(slot: int) -> np.ndarray:
    if slot not in _R:
        raise ParameterError(f"slot must be 1, 2 or 3, got {slot}")
    R = np.zeros((3, 3), dtype=complex)
    R[_R[slot]] = 1.0
    return R


def embed_X(slot: int, A: np.ndarray) -> np.ndarray:
    """Hermitian qutrit embedding R_slot (x) A + R_slot^dag (x) A^dag."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"A must be square, got shape {A.shape}")
    R = qutrit_R(slot)
    H = np.kron(R, A) + np.kron(R.conj().T, A.conj().T)
    assert is_hermitian(H, 0.0)
    return H


def slot_permutation(slot: int) -> np.ndarray:
    """Qutrit permutation P with P R_3 P^T = R_slot."""
    perm = {1: [0, 2, 1], 2: [1, 0, 2], 3: [0, 1, 2]}[slot]
    P = np.zeros((3, 3))
    P[perm, [0, 1, 2]] = 1.0
    return P


def matexp(H: np.ndarray, t: float) -> np.ndarray:
    """exp(iHt) for Hermitian H via its eigendecomposition."""
    H = np.asarray(H, dtype=complex)
    if not is_hermitian(H):
        raise ParameterError("matexp requires a Hermitian generator")
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (V * np.exp(1j * w * t)) @ V.conj().T


def xi_operator(n: int) -> np.ndarray:
    """Partial isometry sum_i |i><i| (x) |0><i| on C^n (x) C^n."""
    if n < 2:
        raise ParameterError(f"N must be >= 2, got {n}")
    Xi = np.zeros((n * n, n * n), dtype=complex)
    i = np.arange(n)
    Xi[i * n, i * n + i] = 1.0
    return Xi


def write_matrix(path, A: np.ndarray) -> None:
    """Plain-text dump: ``rows cols`` header, then one row per line of re,im pairs."""
    A = np.asarray(A, dtype=complex)
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    for row in A:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    lines = Path(path).read_text().split("\n")
    rows, cols = (int(v) for v in lines[0].split())
    A = np.empty((rows, cols), dtype=complex)
    for r in range(rows):
        cells = lines[1 + r].split()
        if len(cells) != cols:
            raise ParameterError(f"row {r} has {len(cells)} entries, expected {cols}")
        for c, cell in enumerate(cells):
            re, im = cell.split(",")
            A[r, c] = complex(float(re), float(im))
    return A
