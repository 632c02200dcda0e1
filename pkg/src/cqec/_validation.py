"""Input validation helpers in the spirit of ``sklearn.utils.validation``.

scikit-learn's own ``check_array`` rejects complex input, so quantum states
get their own checkers here. Each returns a fresh ``complex128`` array.
"""

from __future__ import annotations

import numbers

import numpy as np

from ._constants import TOL
from .exceptions import InvalidArgumentError, InvalidStateError


def check_state_vector(psi, *, name: str = "state", normalize: bool = False) -> np.ndarray:
    """Validate a pure state given as a 1-D amplitude vector.

    Args:
        psi: array-like of complex amplitudes.
        name: label used in error messages.
        normalize: rescale to unit norm instead of rejecting.

    Returns:
        ndarray: complex128 copy with unit Euclidean norm.

    Raises:
        InvalidArgumentError: not 1-D, empty, or zero norm.
        InvalidStateError: norm differs from 1 and ``normalize`` is False.
    """
    vec = np.array(psi, dtype=np.complex128)
    if vec.ndim != 1 or vec.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InvalidArgumentError(f"{name} has non-finite amplitudes")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise InvalidArgumentError(f"{name} has zero norm")
    if normalize:
        return vec / norm
    if abs(norm - 1.0) > TOL.norm:
        raise InvalidStateError(f"{name} has norm {norm!r}, expected 1")
    return vec


def check_density_matrix(rho, *, name: str = "rho", check_psd: bool = True) -> np.ndarray:
    """Validate a density matrix.

    Checks shape, Hermiticity and unit trace at the package tolerances, and
    optionally positivity with the PSD slack. A 1-D input is read as a pure
    state and converted to its projector.
    """
    mat = np.array(rho, dtype=np.complex128)
    if mat.ndim == 1:
        vec = check_state_vector(mat, name=name)
        return np.outer(vec, vec.conj())
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    herm_err = np.max(np.abs(mat - mat.conj().T))
    if herm_err > TOL.hermiticity:
        raise InvalidStateError(f"{name} is not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(mat).real
    if abs(tr - 1.0) > TOL.trace:
        raise InvalidStateError(f"{name} has trace {tr!r}, expected 1")
    if check_psd:
        lam_min = np.linalg.eigvalsh(mat)[0]
        if lam_min < -TOL.psd_slack:
            raise InvalidStateError(f"{name} has eigenvalue {lam_min:.3e} below the PSD slack")
    return mat


def as_density_matrix(state, *, name: str = "state") -> np.ndarray:
    """Return a density matrix for either a state vector or a density matrix."""
    return check_density_matrix(state, name=name)


def check_same_dim(a: np.ndarray, b: np.ndarray, names: tuple[str, str] = ("a", "b")) -> int:
    if a.shape[0] != b.shape[0]:
        raise InvalidArgumentError(
            f"dimension mismatch: {names[0]} has {a.shape[0]}, {names[1]} has {b.shape[0]}"
        )
    return a.shape[0]


def check_probability(p, name: str = "p") -> float:
    if not isinstance(p, numbers.Real) or not 0.0 <= float(p) <= 1.0:
        raise InvalidArgumentError(f"{name} must be a real number in [0, 1], got {p!r}")
    return float(p)


def check_nonnegative(x, name: str) -> float:
    if not isinstance(x, numbers.Real) or not float(x) >= 0.0:
        raise InvalidArgumentError(f"{name} must be a nonnegative real, got {x!r}")
    return float(x)


def n_qubits_for_dim(d: int) -> int:
    """Number of qubits for a power-of-two dimension."""
    if d < 1 or d & (d - 1):
        raise InvalidArgumentError(f"dimension {d} is not a power of two")
    return d.bit_length() - 1
