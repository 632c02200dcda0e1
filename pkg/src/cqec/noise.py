"""Decoherence channels and the analytic dephased-fidelity predictor."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ._constants import TOL
from ._validation import (
    check_density_matrix,
    check_nonnegative,
    check_probability,
    check_state_vector,
    n_qubits_for_dim,
)
from .exceptions import InvalidArgumentError
from .qstate import HamiltonianSpec

__all__ = [
    "NoiseKind",
    "NoiseSpec",
    "SelectiveDephaseInfo",
    "dephase",
    "depolarize",
    "amplitude_damp",
    "combined",
    "epsilon_family",
    "selective_dephase",
    "predicted_dephased_fidelity",
    "COMBINED_DEFAULTS",
]

COMBINED_DEFAULTS = {"gamma": 1.0, "p": 0.15, "gamma_ad": 0.1}


def _check_h(rho: np.ndarray, h: HamiltonianSpec) -> None:
    if h.dim != rho.shape[0]:
        raise InvalidArgumentError(f"Hamiltonian dim {h.dim} != state dim {rho.shape[0]}")


def dephase(rho, h: HamiltonianSpec, gamma: float) -> np.ndarray:
    """Damp ``rho_ij`` by ``exp(-gamma |E_i - E_j|)``."""
    rho = check_density_matrix(rho)
    _check_h(rho, h)
    gamma = check_nonnegative(gamma, "gamma")
    gaps = np.abs(h.gaps()).astype(float)
    with np.errstate(invalid="ignore"):
        factor = np.where(gaps == 0, 1.0, np.exp(-gamma * gaps))
    return rho * factor


def depolarize(rho, p: float) -> np.ndarray:
    rho = check_density_matrix(rho)
    p = check_probability(p)
    d = rho.shape[0]
    return (1.0 - p) * rho + p * np.eye(d) / d


def amplitude_damp(rho, gamma_ad: float, n_qubits: int | None = None) -> np.ndarray:
    """Independent single-qubit amplitude damping on every qubit.

    Kraus pair ``E0 = diag(1, sqrt(1 - g))`` and ``E1 = sqrt(g) |0><1|``.
    """
    rho = check_density_matrix(rho)
    g = check_probability(gamma_ad, "gamma_ad")
    n = n_qubits_for_dim(rho.shape[0])
    if n_qubits is not None and n_qubits != n:
        raise InvalidArgumentError(f"state has {n} qubits, got n_qubits={n_qubits}")
    kraus = (
        np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - g)]]),
        np.array([[0.0, np.sqrt(g)], [0.0, 0.0]]),
    )
    t = rho.reshape((2,) * (2 * n))
    for q in range(n):
        ax = n - 1 - q  # C-order axis of qubit q
        out = np.zeros_like(t)
        for k in kraus:
            tk = np.moveaxis(np.tensordot(k, t, axes=([1], [ax])), 0, ax)
            tk = np.moveaxis(np.tensordot(tk, k.conj(), axes=([n + ax], [1])), -1, n + ax)
            out += tk
        t = out
    return t.reshape(rho.shape)


def combined(rho, h: HamiltonianSpec, gamma: float = 1.0, p: float = 0.15,
             gamma_ad: float = 0.1) -> np.ndarray:
    """Dephasing, then depolarizing, then amplitude damping."""
    return amplitude_damp(depolarize(dephase(rho, h, gamma), p), gamma_ad)


def epsilon_family(target, eps: float) -> np.ndarray:
    """Keep the target's diagonal, set every off-diagonal to ``eps`` times its phase.

    Raises:
        InvalidArgumentError: ``eps`` is negative or large enough to make the
            result non-positive.
    """
    psi = check_state_vector(target, name="target")
    eps = check_nonnegative(eps, "eps")
    rho = np.outer(psi, psi.conj())
    mag = np.abs(rho)
    phase = np.divide(rho, mag, out=np.ones_like(rho), where=mag > 0)
    out = eps * phase
    np.fill_diagonal(out, np.diag(rho).real)
    lam_min = np.linalg.eigvalsh(out)[0]
    if lam_min < -TOL.psd_slack:
        raise InvalidArgumentError(
            f"eps={eps!r} breaks positivity (smallest eigenvalue {lam_min:.3e})"
        )
    return out


@dataclass(frozen=True)
class SelectiveDephaseInfo:
    repaired: bool
    mixing_weight: float
    min_eigenvalue_before: float


def selective_dephase(rho, h: HamiltonianSpec, gap: int, *, return_info: bool = False):
    """Zero every entry with ``|E_i - E_j| = gap``.

    If zeroing leaves a negative eigenvalue, the result is mixed with ``I/d``
    by the smallest weight that restores positivity. Mixing with the identity
    keeps zeroed entries at zero, so the removed gap stays absent.
    """
    rho = check_density_matrix(rho)
    _check_h(rho, h)
    gap = int(gap)
    if gap == 0:
        raise InvalidArgumentError("gap must be nonzero")
    out = np.where(np.abs(h.gaps()) == abs(gap), 0.0, rho).astype(np.complex128)
    d = out.shape[0]
    lam_min = float(np.linalg.eigvalsh(out)[0])
    t = 0.0
    if lam_min < 0.0:
        t = -lam_min / (1.0 / d - lam_min)
        out = (1.0 - t) * out + t * np.eye(d) / d
    if return_info:
        return out, SelectiveDephaseInfo(t > 0.0, t, lam_min)
    return out


def predicted_dephased_fidelity(tr_diag_sq: float, gamma: float) -> float:
    """Fidelity of a dephased pure state with itself under a unit-gap profile.

    ``T + exp(-gamma) (1 - T)`` where ``T = sum_i |psi_i|^4``.
    """
    if not 0.0 <= tr_diag_sq <= 1.0:
        raise InvalidArgumentError("tr_diag_sq must lie in [0, 1]")
    gamma = check_nonnegative(gamma, "gamma")
    return float(tr_diag_sq + np.exp(-gamma) * (1.0 - tr_diag_sq))


class NoiseKind(enum.Enum):
    DEPHASING = "dephasing"
    DEPOLARIZING = "depolarizing"
    AMPLITUDE_DAMPING = "amplitude_damping"
    COMBINED = "combined"
    SELECTIVE_DEPHASING = "selective_dephasing"
    EPSILON_FAMILY = "epsilon_family"


@dataclass(frozen=True)
class NoiseSpec:
    """A noise channel with its parameters.

    >>> NoiseSpec.dephasing(2.0).params
    {'gamma': 2.0}
    """

    kind: NoiseKind
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        k = self.kind
        if k is NoiseKind.DEPHASING:
            check_nonnegative(p.get("gamma", -1), "gamma")
        elif k is NoiseKind.DEPOLARIZING:
            check_probability(p.get("p", -1))
        elif k is NoiseKind.AMPLITUDE_DAMPING:
            check_probability(p.get("gamma_ad", -1), "gamma_ad")
        elif k is NoiseKind.COMBINED:
            p = {**COMBINED_DEFAULTS, **p}
            check_nonnegative(p["gamma"], "gamma")
            check_probability(p["p"])
            check_probability(p["gamma_ad"], "gamma_ad")
        elif k is NoiseKind.SELECTIVE_DEPHASING:
            if not isinstance(p.get("gap"), (int, np.integer)) or p["gap"] == 0:
                raise InvalidArgumentError("selective dephasing needs a nonzero integer gap")
        elif k is NoiseKind.EPSILON_FAMILY:
            check_nonnegative(p.get("eps", -1), "eps")
        object.__setattr__(self, "params", p)

    @classmethod
    def dephasing(cls, gamma: float) -> "NoiseSpec":
        return cls(NoiseKind.DEPHASING, {"gamma": gamma})

    @classmethod
    def depolarizing(cls, p: float) -> "NoiseSpec":
        return cls(NoiseKind.DEPOLARIZING, {"p": p})

    @classmethod
    def amplitude_damping(cls, gamma_ad: float) -> "NoiseSpec":
        return cls(NoiseKind.AMPLITUDE_DAMPING, {"gamma_ad": gamma_ad})

    @classmethod
    def combined(cls, gamma: float = 1.0, p: float = 0.15, gamma_ad: float = 0.1) -> "NoiseSpec":
        return cls(NoiseKind.COMBINED, {"gamma": gamma, "p": p, "gamma_ad": gamma_ad})

    @classmethod
    def selective_dephasing(cls, gap: int) -> "NoiseSpec":
        return cls(NoiseKind.SELECTIVE_DEPHASING, {"gap": gap})

    @classmethod
    def epsilon(cls, eps: float) -> "NoiseSpec":
        return cls(NoiseKind.EPSILON_FAMILY, {"eps": eps})

    def apply(self, state, h: HamiltonianSpec) -> np.ndarray:
        """Apply the channel to a state vector or density matrix."""
        p = self.params
        k = self.kind
        if k is NoiseKind.EPSILON_FAMILY:
            return epsilon_family(state, p["eps"])
        rho = check_density_matrix(state)
        if k is NoiseKind.DEPHASING:
            return dephase(rho, h, p["gamma"])
        if k is NoiseKind.DEPOLARIZING:
            return depolarize(rho, p["p"])
        if k is NoiseKind.AMPLITUDE_DAMPING:
            return amplitude_damp(rho, p["gamma_ad"])
        if k is NoiseKind.COMBINED:
            return combined(rho, h, p["gamma"], p["p"], p["gamma_ad"])
        return selective_dephase(rho, h, p["gap"])

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, **self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        data = dict(data)
        return cls(NoiseKind(data.pop("kind")), data)
