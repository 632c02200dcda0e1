"""Density-matrix kernel: Hamiltonian specs, tensor algebra and state measures.

Register convention: a joint state over registers ``R0, R1, ..., Rk`` is stored
as ``kron(Rk, ..., R1, R0)`` so that qubit ``q`` of the flattened register is
bit ``q`` of the basis index (little-endian). :func:`partial_trace` takes its
``dims`` in kron order (leftmost factor first); callers that think in register
order should reverse.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ._constants import TOL
from ._validation import (
    check_density_matrix,
    check_same_dim,
    check_state_vector,
    n_qubits_for_dim,
)
from .exceptions import InvalidArgumentError

__all__ = [
    "Convention",
    "HamiltonianSpec",
    "PureEnsemble",
    "tensor",
    "partial_trace",
    "uhlmann_fidelity",
    "l1_coherence",
    "coherence_support",
    "qfi",
    "trace_distance",
    "purity",
    "projector",
    "maximally_coherent",
]


class Convention(enum.Enum):
    QUBIT_SUM_Z = "QubitSumZ"
    LINEAR_LADDER = "LinearLadder"


@dataclass(frozen=True)
class HamiltonianSpec:
    """Diagonal integer Hamiltonian.

    Use :meth:`qubit_sum_z` or :meth:`linear_ladder` rather than the raw
    constructor; ``__post_init__`` rejects energies that do not match the
    named convention.
    """

    energies: tuple[int, ...]
    convention: Convention

    def __post_init__(self):
        energies = tuple(self.energies)
        if not energies:
            raise InvalidArgumentError("energies must be non-empty")
        for e in energies:
            if isinstance(e, (bool, np.bool_)) or int(e) != e:
                raise InvalidArgumentError(f"energies must be integers, got {e!r}")
        energies = tuple(int(e) for e in energies)
        object.__setattr__(self, "energies", energies)
        d = len(energies)
        if self.convention is Convention.QUBIT_SUM_Z:
            n = n_qubits_for_dim(d)
            expected = tuple(n - 2 * k.bit_count() for k in range(d))
        elif self.convention is Convention.LINEAR_LADDER:
            expected = tuple(range(d))
        else:
            raise InvalidArgumentError(f"unknown convention {self.convention!r}")
        if energies != expected:
            raise InvalidArgumentError(
                f"energies do not match the {self.convention.value} convention for d={d}"
            )

    @classmethod
    def qubit_sum_z(cls, n_qubits: int) -> "HamiltonianSpec":
        """``H = sum_q Z_q`` on ``n_qubits`` qubits, ``E_k = n - 2 popcount(k)``."""
        if n_qubits < 0:
            raise InvalidArgumentError("n_qubits must be nonnegative")
        return cls(tuple(n_qubits - 2 * k.bit_count() for k in range(2**n_qubits)),
                   Convention.QUBIT_SUM_Z)

    @classmethod
    def linear_ladder(cls, d: int) -> "HamiltonianSpec":
        if d < 1:
            raise InvalidArgumentError("d must be positive")
        return cls(tuple(range(d)), Convention.LINEAR_LADDER)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def diag(self) -> np.ndarray:
        return np.asarray(self.energies, dtype=float)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag).astype(np.complex128)

    def gaps(self) -> np.ndarray:
        """Integer matrix of ``E_i - E_j``."""
        e = np.asarray(self.energies, dtype=np.int64)
        return e[:, None] - e[None, :]


@dataclass(frozen=True)
class PureEnsemble:
    """Mixed state stored as ``sum_i w_i |phi_i><phi_i|``.

    ``members`` has shape ``(m, d)``, one state per row. This is the cheap
    representation for large joint spaces where the rank stays small.
    """

    weights: np.ndarray
    members: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        m = np.array(self.members, dtype=np.complex128)
        if m.ndim != 2 or w.ndim != 1 or w.shape[0] != m.shape[0] or w.size == 0:
            raise InvalidArgumentError("weights must be (m,) and members (m, d)")
        if np.any(w < 0) or abs(w.sum() - 1.0) > TOL.trace:
            raise InvalidArgumentError("weights must be nonnegative and sum to 1")
        norms = np.linalg.norm(m, axis=1)
        if np.any(np.abs(norms - 1.0) > TOL.norm):
            raise InvalidArgumentError("ensemble members must have unit norm")
        w.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", m)

    @classmethod
    def from_density(cls, rho, cutoff: float = TOL.eig_cutoff) -> "PureEnsemble":
        """Spectral decomposition, dropping eigenvalues at or below ``cutoff``."""
        rho = check_density_matrix(rho)
        lam, vecs = np.linalg.eigh(rho)
        keep = lam > cutoff
        lam = lam[keep]
        return cls(lam / lam.sum(), vecs[:, keep].T)

    @classmethod
    def pure(cls, psi) -> "PureEnsemble":
        return cls(np.ones(1), check_state_vector(psi)[None, :])

    @property
    def dim(self) -> int:
        return self.members.shape[1]

    @property
    def rank(self) -> int:
        return self.members.shape[0]

    def to_density(self) -> np.ndarray:
        m = self.members
        return (m.T * self.weights) @ m.conj()


def projector(psi) -> np.ndarray:
    psi = check_state_vector(psi)
    return np.outer(psi, psi.conj())


def maximally_coherent(d: int) -> np.ndarray:
    """The uniform superposition ``sum_k |k> / sqrt(d)``."""
    if d < 1:
        raise InvalidArgumentError("d must be positive")
    return np.full(d, 1.0 / np.sqrt(d), dtype=np.complex128)


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b`` of two density matrices."""
    return np.kron(check_density_matrix(a, name="a"), check_density_matrix(b, name="b"))


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Trace out every factor of ``rho`` whose index is not in ``keep``.

    Args:
        rho: density matrix on ``prod(dims)`` levels.
        dims: factor dimensions in kron order.
        keep: indices into ``dims`` to retain; kept factors stay in kron order.

    Raises:
        InvalidArgumentError: ``prod(dims)`` differs from the matrix size or a
            ``keep`` index is out of range.
    """
    rho = check_density_matrix(rho, check_psd=False)
    dims = [int(x) for x in dims]
    if any(x < 1 for x in dims) or int(np.prod(dims)) != rho.shape[0]:
        raise InvalidArgumentError(f"dims {dims} do not multiply to {rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise InvalidArgumentError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # contract traced factors one at a time, highest index first so axes stay valid
    traced = [k for k in range(n) if k not in keep]
    cur = n
    for k in reversed(traced):
        t = np.trace(t, axis1=k, axis2=k + cur)
        cur -= 1
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(rho)
    lam = np.where(lam > TOL.eig_cutoff, lam, 0.0)
    return (vecs * np.sqrt(lam)) @ vecs.conj().T


def uhlmann_fidelity(rho, sigma) -> float:
    """Squared Uhlmann fidelity ``(Tr |sqrt(rho) sqrt(sigma)|)^2``.

    A 1-D argument is treated as a pure state and the fidelity reduces to
    ``<psi|sigma|psi>`` without any square roots. Result is clipped to [0, 1].
    """
    a = np.asarray(rho)
    b = np.asarray(sigma)
    if a.ndim == 1 or b.ndim == 1:
        if a.ndim != 1:
            a, b = b, a
        psi = check_state_vector(a, name="rho")
        if b.ndim == 1:
            phi = check_state_vector(b, name="sigma")
            check_same_dim(psi, phi, ("rho", "sigma"))
            val = abs(np.vdot(psi, phi)) ** 2
        else:
            s = check_density_matrix(b, name="sigma")
            check_same_dim(psi, s, ("rho", "sigma"))
            val = np.real(psi.conj() @ s @ psi)
        return float(np.clip(val, 0.0, 1.0))
    a = check_density_matrix(a, name="rho")
    b = check_density_matrix(b, name="sigma")
    check_same_dim(a, b, ("rho", "sigma"))
    sv = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    return float(np.clip(sv.sum() ** 2, 0.0, 1.0))


def l1_coherence(rho) -> float:
    """Sum of absolute values of all off-diagonal entries."""
    rho = check_density_matrix(rho)
    # mask instead of subtracting the diagonal: tiny coherences would cancel away
    off = ~np.eye(rho.shape[0], dtype=bool)
    return float(np.abs(rho[off]).sum())


def coherence_support(rho, threshold: float = TOL.mode_threshold) -> int:
    """Number of ordered off-diagonal pairs ``(i, j)`` with ``|rho_ij| > threshold``."""
    rho = check_density_matrix(rho)
    mask = np.abs(rho) > threshold
    np.fill_diagonal(mask, False)
    return int(mask.sum())


def qfi(rho, h: HamiltonianSpec) -> float:
    """Quantum Fisher information of ``rho`` for generator ``h``.

    ``2 sum_{i,j} (l_i - l_j)^2 / (l_i + l_j) |<i|H|j>|^2`` over eigenpairs of
    ``rho``, skipping pairs whose weights sum below the eigenvalue cutoff.
    """
    rho = check_density_matrix(rho)
    if h.dim != rho.shape[0]:
        raise InvalidArgumentError(f"Hamiltonian dim {h.dim} != state dim {rho.shape[0]}")
    lam, vecs = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    h_eig = (vecs.conj().T * h.diag) @ vecs
    num = (lam[:, None] - lam[None, :]) ** 2
    den = lam[:, None] + lam[None, :]
    mask = den > TOL.eig_cutoff
    ratio = np.zeros_like(num)
    ratio[mask] = num[mask] / den[mask]
    return float(max(0.0, 2.0 * np.sum(ratio * np.abs(h_eig) ** 2)))


def trace_distance(a, b) -> float:
    """``0.5 * ||a - b||_1``."""
    a = check_density_matrix(a, name="a", check_psd=False)
    b = check_density_matrix(b, name="b", check_psd=False)
    check_same_dim(a, b)
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def purity(rho) -> float:
    rho = check_density_matrix(rho)
    return float(np.real(np.vdot(rho, rho)))


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)
