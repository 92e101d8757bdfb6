"""Classical diffusion map. Serves as ground truth for every simulated stage."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import DataSet
from .errors import NumericalError, ParameterError


@dataclass
class KernelSystem:
    W: np.ndarray
    D: np.ndarray
    P: np.ndarray | None = None
    S: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.W.shape[0]


@dataclass
class EigenSystem:
    """Eigenpairs of P, sorted by eigenvalue descending.

    ``psi`` holds the orthonormal eigenvectors of the symmetrized matrix S.
    Right vectors are sqrt(sum d) * D^{-1/2} psi and left vectors
    D^{1/2} psi / sqrt(sum d), so u_0 is the stationary distribution
    (sums to 1), v_0 is the all-ones vector and u_i . v_i = 1.
    """

    lambdas: np.ndarray
    right_vecs: np.ndarray
    left_vecs: np.ndarray
    psi: np.ndarray


@dataclass
class DiffusionEmbedding:
    t_steps: int
    m: int
    coords: np.ndarray


def kernel_matrix(X: DataSet) -> KernelSystem:
    """Unit-bandwidth Gaussian kernel and its row sums."""
    d2 = cdist(X.points, X.points, "sqeuclidean")
    W = np.exp(-d2 / 2.0)
    W = 0.5 * (W + W.T)
    return KernelSystem(W=W, D=W.sum(axis=1))


def transition_matrix(ks: KernelSystem) -> KernelSystem:
    if not np.all(ks.D > 0):
        raise NumericalError("nonpositive degree; kernel invariant violated")
    P = ks.W / ks.D[:, None]
    r = 1.0 / np.sqrt(ks.D)
    S = r[:, None] * ks.W * r[None, :]
    S = 0.5 * (S + S.T)
    return KernelSystem(W=ks.W, D=ks.D, P=P, S=S)


def fix_sign(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    vecs = np.array(vecs, copy=True)
    if vecs.ndim == 1:
        return vecs if vecs[np.argmax(np.abs(vecs))].real >= 0 else -vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])].real)
    signs[signs == 0] = 1.0
    return vecs * signs


def eigendecompose(ks: KernelSystem) -> EigenSystem:
    if ks.S is None:
        raise ParameterError("transition_matrix must be applied first")
    try:
        lam, psi = np.linalg.eigh(ks.S)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(ks.S)
        raise NumericalError(f"symmetric eigensolver failed (cond(S)={cond:.3g})") from exc
    order = np.argsort(-lam, kind="stable")
    lam, psi = lam[order], psi[:, order]
    psi = fix_sign(psi / np.linalg.norm(psi, axis=0))
    total = ks.D.sum()
    sqrt_d = np.sqrt(ks.D)
    right = np.sqrt(total) * psi / sqrt_d[:, None]
    left = psi * sqrt_d[:, None] / np.sqrt(total)
    return EigenSystem(lambdas=lam, right_vecs=right, left_vecs=left, psi=psi)


def diffusion_map(es: EigenSystem, t: int, m: int) -> DiffusionEmbedding:
    n = len(es.lambdas)
    if not 1 <= m <= n - 1:
        raise ParameterError(f"m must lie in [1, {n - 1}], got {m}")
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    lam = es.lambdas[1 : m + 1]
    coords = es.right_vecs[:, 1 : m + 1] * lam**t
    return DiffusionEmbedding(t_steps=t, m=m, coords=coords)


def transition_power(P: np.ndarray, t: int) -> np.ndarray:
    """P^t by repeated multiplication, independent of any eigensystem."""
    out = np.eye(P.shape[0])
    for _ in range(t):
        out = out @ P
    return out


def diffusion_distance(ks: KernelSystem, es: EigenSystem, i: int, j: int, t: int) -> float:
    n = ks.n
    if not (0 <= i < n and 0 <= j < n):
        raise ParameterError(f"indices ({i}, {j}) out of range for N={n}")
    if i == j:
        return 0.0
    Pt = transition_power(ks.P, t)
    u0 = es.left_vecs[:, 0]
    return float(np.sqrt(np.sum((Pt[i] - Pt[j]) ** 2 / u0)))


def diffusion_distances_sq(ks: KernelSystem, es: EigenSystem, t: int) -> np.ndarray:
    """All pairwise squared diffusion distances."""
    Pt = transition_power(ks.P, t)
    u0 = es.left_vecs[:, 0]
    diff = Pt[:, None, :] - Pt[None, :, :]
    return np.sum(diff**2 / u0, axis=2)


def verify_embedding_identity(ks: KernelSystem, es: EigenSystem, t: int) -> float:
    """Largest gap between diffusion distance^2 and full-embedding distance^2."""
    n = ks.n
    dist2 = diffusion_distances_sq(ks, es, t)
    phi = es.right_vecs[:, 1:n] * es.lambdas[1:n] ** t
    emb2 = np.sum((phi[:, None, :] - phi[None, :, :]) ** 2, axis=2)
    return float(np.max(np.abs(dist2 - emb2)))
