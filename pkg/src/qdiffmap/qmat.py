"""Matrix arithmetic in the exponent: products, tensor and Hadamard products.

Every operand is something that can hand out e^{iX_slot(A) tau} for any
tau. Exact operands exponentiate their matrix directly; product operands
build the exponential from group-commutator words of their factors, which
may themselves be products. Nesting is how the degree unitary is built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import DataSet
from .errors import AccuracyError, CapacityError, ParameterError
from .qlinalg import (
    all_ones_density,
    embed_X,
    kernel_density,
    matexp,
    op_norm,
    slot_permutation,
    xi_operator,
)

DEFAULT_CAP = 16
# Word iterations for products that feed another product. Their error enters
# the outer product suppressed by the outer step, so a modest count suffices;
# large counts at tiny steps hit the float64 rounding floor instead.
NESTED_REPEATS = 100


@dataclass(frozen=True)
class QmatConfig:
    """Evolution time ``t`` and step parameter ``m``.

    ``repeats`` is the commutator-word iteration count n'; it defaults to
    m^2/(2t) rounded to the nearest positive integer. The word step is
    sqrt(t / (2 n')) rather than t/m so that the simulated time is exactly
    ``t`` even after rounding n'.
    """

    t: float
    m: int
    repeats: int | None = None

    def __post_init__(self):
        if not self.t > 0:
            raise ParameterError(f"t must be positive, got {self.t}")
        if self.m < 2:
            raise ParameterError(f"m must be >= 2, got {self.m}")
        if self.repeats is None:
            object.__setattr__(self, "repeats", max(1, round(self.m**2 / (2 * self.t))))
        if self.repeats < 1:
            raise ParameterError(f"n' must be >= 1, got {self.repeats}")

    @classmethod
    def with_repeats(cls, t: float, repeats: int) -> "QmatConfig":
        m = max(2, round(math.sqrt(2 * t * repeats)))
        return cls(t=t, m=m, repeats=repeats)

    @classmethod
    def for_budget(cls, t: float, eps: float) -> "QmatConfig":
        return cls(t=t, m=max(2, math.ceil(math.sqrt(t**3 / eps))))

    @property
    def step(self) -> float:
        return math.sqrt(self.t / (2 * self.repeats))

    @property
    def eps_target(self) -> float:
        # t^3/m^2 with unit constant; every generator here has norm <= 1
        return self.t**3 / self.m**2


def basis_rotation(n: int) -> np.ndarray:
    """diag(sqrt(-i) I, I, sqrt(i) I) on qutrit (x) C^n."""
    phases = np.array([np.exp(-1j * np.pi / 4), 1.0, np.exp(1j * np.pi / 4)])
    return np.kron(np.diag(phases), np.eye(n))


def nearest_unitary(W: np.ndarray) -> np.ndarray:
    """Polar factor of W. Strips rounding drift that powering would amplify."""
    u, _, vh = np.linalg.svd(W)
    return u @ vh


def commutator_word(expX: np.ndarray, expY: np.ndarray) -> np.ndarray:
    """e^x e^y e^-x e^-y e^-x e^-y e^x e^y from e^x and e^y (unitary inputs)."""
    if expX.shape != expY.shape:
        raise ParameterError(f"dimension mismatch: {expX.shape} vs {expY.shape}")
    iX, iY = expX.conj().T, expY.conj().T
    return expX @ expY @ iX @ iY @ iX @ iY @ expX @ expY


def qmat_multiply(
    expA1_step: np.ndarray,
    expA2_step: np.ndarray,
    cfg: QmatConfig,
    rotation: np.ndarray | None = None,
) -> np.ndarray:
    """Approximate e^{iX_3(A1 A2) t} from e^{iX_1(A1) s} and e^{iX_2(A2) s}, s = cfg.step."""
    if cfg.repeats < 1:
        raise ParameterError("inconsistent QMAT config: n' < 1")
    if rotation is None:
        rotation = basis_rotation(expA1_step.shape[0] // 3)
    word = nearest_unitary(commutator_word(expA1_step, expA2_step))
    power = nearest_unitary(np.linalg.matrix_power(word, cfg.repeats))
    return rotation @ power @ rotation.conj().T


def exact_exponential(A: np.ndarray, t: float, slot: int = 3) -> np.ndarray:
    return matexp(embed_X(slot, A), t)


def deviation(U: np.ndarray, V: np.ndarray) -> float:
    return op_norm(U - V)


def _permute(U3: np.ndarray, slot: int) -> np.ndarray:
    if slot == 3:
        return U3
    P = np.kron(slot_permutation(slot), np.eye(U3.shape[0] // 3))
    return P @ U3 @ P.T


class Operand:
    matrix: np.ndarray

    def exp(self, slot: int, tau: float) -> np.ndarray:
        raise NotImplementedError


@dataclass
class ExactOperand(Operand):
    """A matrix whose exponential is available directly (density or sparse)."""

    matrix: np.ndarray

    def exp(self, slot, tau):
        return exact_exponential(self.matrix, tau, slot)


@dataclass
class TensorIdentity(Operand):
    """inner (x) I_k. Uses e^{iX(A)t} (x) I = e^{iX(A (x) I)t} with the qutrit leftmost."""

    inner: Operand
    k: int

    @property
    def matrix(self):
        return np.kron(self.inner.matrix, np.eye(self.k))

    def exp(self, slot, tau):
        return np.kron(self.inner.exp(slot, tau), np.eye(self.k))


@dataclass
class ProductOperand(Operand):
    """left @ right, exponentiated by QMAT multiplication with ``repeats`` word iterations."""

    left: Operand
    right: Operand
    repeats: int

    @property
    def matrix(self):
        return self.left.matrix @ self.right.matrix

    def config(self, tau: float) -> QmatConfig:
        return QmatConfig.with_repeats(tau, self.repeats)

    def exp(self, slot, tau):
        cfg = self.config(tau)
        s = cfg.step
        U3 = qmat_multiply(self.left.exp(1, s), self.right.exp(2, s), cfg)
        return _permute(U3, slot)


@dataclass
class UDOperator:
    """Controlled degree unitary on registers [3, N, N].

    The |0>-slice generator is X_3(scale * D/N) with scale = 1/N, i.e. the
    block carries eigenphases +-d_i t / N^2 (and zeros from the idle qutrit
    level).
    """

    mat: np.ndarray
    t: float
    n: int
    scale: float
    exact: bool
    deviation: float = 0.0
    stage_deviations: dict = field(default_factory=dict)
    eps_target: float = 0.0
    # QPE outputs keyed by phase-register size, shared between inversions
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree_factor(self) -> float:
        """Multiplier taking a degree d_i to its generator eigenvalue."""
        return self.scale / self.n

    def zero_slice(self) -> np.ndarray:
        n = self.n
        T = self.mat.reshape(3, n, n, 3, n, n)
        return T[:, :, 0, :, :, 0].reshape(3 * n, 3 * n)

    def complement_block(self) -> np.ndarray:
        """U_D restricted to last-register states orthogonal to |0>."""
        n = self.n
        T = self.mat.reshape(3, n, n, 3, n, n)
        return T[:, :, 1:, :, :, 1:].reshape(3 * n * (n - 1), 3 * n * (n - 1))


def xi_conjugate(M: np.ndarray) -> np.ndarray:
    """Xi M Xi^dag for M on C^n (x) C^n."""
    n = math.isqrt(M.shape[0])
    if n * n != M.shape[0] or M.shape[0] != M.shape[1]:
        raise ParameterError(f"expected an n^2 x n^2 matrix, got {M.shape}")
    Xi = xi_operator(n)
    return Xi @ M @ Xi.conj().T


def hadamard_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A (.) B read off the |0> slice of Xi (A (x) B) Xi^dag."""
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ParameterError(f"need equal square matrices, got {A.shape} and {B.shape}")
    n = A.shape[0]
    C = xi_conjugate(np.kron(A, B)).reshape(n, n, n, n)
    return C[:, 0, :, 0]


def degree_generator(khat: np.ndarray) -> np.ndarray:
    """Xi (K^ 1^ (x) I) Xi^dag computed classically; equals diag(K^ 1^) (x) |0><0|."""
    n = khat.shape[0]
    Xi = xi_operator(n)
    B = khat @ all_ones_density(n)
    return Xi @ np.kron(B, np.eye(n)) @ Xi.conj().T


def degree_operand(khat: np.ndarray, repeats: int, nested_repeats: int = NESTED_REPEATS) -> ProductOperand:
    n = khat.shape[0]
    Xi = xi_operator(n)
    k1 = ProductOperand(ExactOperand(khat), ExactOperand(all_ones_density(n)), nested_repeats)
    right = ProductOperand(TensorIdentity(k1, n), ExactOperand(Xi.conj().T), nested_repeats)
    return ProductOperand(ExactOperand(Xi), right, repeats)


def build_U_D(
    X: DataSet,
    cfg: QmatConfig,
    exact: bool = False,
    cap: int = DEFAULT_CAP,
    nested_repeats: int = NESTED_REPEATS,
) -> UDOperator:
    """Controlled e^{iX_3(D^) t} from K^ and 1^ through three QMAT products.

    Stage 1 multiplies K^ by 1^, the result is tensored with I, then the
    Xi^dag and Xi conjugations are two further products. The outermost
    product uses ``cfg``; the two nested ones use ``nested_repeats`` word
    iterations at whatever time the enclosing word asks for.
    """
    n = X.n
    if n > cap:
        raise CapacityError(f"N={n} exceeds simulator cap {cap}")
    khat = kernel_density(X)
    exact_gen = degree_generator(khat)
    U_exact = exact_exponential(exact_gen, cfg.t)
    if exact:
        return UDOperator(U_exact, cfg.t, n, 1.0 / n, exact=True)

    op = degree_operand(khat, cfg.repeats, nested_repeats)
    U = op.exp(3, cfg.t)
    dev = deviation(U, U_exact)

    # each stage re-run as a top-level product at the outer (t, n')
    stage = {}
    for name, node in (("k_times_ones", op.right.left.inner), ("times_xi_dag", op.right)):
        top = ProductOperand(node.left, node.right, cfg.repeats)
        stage[name] = deviation(top.exp(3, cfg.t), exact_exponential(top.matrix, cfg.t))
    stage["xi_times"] = dev
    ud = UDOperator(U, cfg.t, n, 1.0 / n, exact=False, deviation=dev,
                    stage_deviations=stage, eps_target=cfg.eps_target)
    if dev > 5 * cfg.eps_target:
        raise AccuracyError(
            f"U_D deviation {dev:.3g} exceeds 5x target {cfg.eps_target:.3g}",
            data={"t": cfg.t, "m": cfg.m, "repeats": cfg.repeats, "deviation": dev, "stages": stage},
        )
    return ud
