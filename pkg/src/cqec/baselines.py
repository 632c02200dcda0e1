"""Analytic error-correction baselines and copy-count bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._constants import TOL
from ._validation import check_density_matrix, check_probability
from .exceptions import FitError, InvalidArgumentError, UndefinedBoundError
from .qstate import HamiltonianSpec, l1_coherence

__all__ = [
    "SURFACE_THRESHOLD",
    "BoundInputs",
    "PowerLawFit",
    "per_qubit_rate",
    "steane_fidelity",
    "surface_logical_error",
    "unprotected_fidelity",
    "finite_copy_infidelity",
    "copies_for_target",
    "bound_constant",
    "copy_mu",
    "power_law_fit",
]

SURFACE_THRESHOLD = 0.01


@dataclass(frozen=True)
class BoundInputs:
    C: float
    target_infidelity: float

    def __post_init__(self):
        if not self.C > 0:
            raise InvalidArgumentError("C must be positive")
        if not 0.0 < self.target_infidelity < 1.0:
            raise InvalidArgumentError("target infidelity must lie in (0, 1)")

    def copies(self) -> int:
        return copies_for_target(self.C, self.target_infidelity)


def per_qubit_rate(p: float, n_q: int) -> float:
    """Per-qubit error rate that compounds to ``p`` over ``n_q`` qubits."""
    p = check_probability(p)
    if int(n_q) != n_q or n_q < 1:
        raise InvalidArgumentError("n_q must be a positive integer")
    return 1.0 - (1.0 - p) ** (1.0 / n_q)


def steane_fidelity(p_eff: float) -> float:
    """Probability of at most one error among the seven code qubits."""
    p = check_probability(p_eff, "p_eff")
    return sum(math.comb(7, k) * p**k * (1.0 - p) ** (7 - k) for k in range(2))


def surface_logical_error(p_eff: float, distance: int) -> float:
    """``(p / p_th)^((distance + 1) / 2)`` with unit prefactor, clipped to [0, 1]."""
    p = check_probability(p_eff, "p_eff")
    if int(distance) != distance or distance < 3 or distance % 2 == 0:
        raise InvalidArgumentError("distance must be an odd integer >= 3")
    return float(min(1.0, (p / SURFACE_THRESHOLD) ** ((distance + 1) / 2)))


def unprotected_fidelity(p: float, d: int) -> float:
    """Fidelity of a depolarized pure state, ``1 - p + p/d``."""
    p = check_probability(p)
    return 1.0 - p + p / d


def finite_copy_infidelity(C: float, n: float) -> float:
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    if C < 0:
        raise InvalidArgumentError("C must be nonnegative")
    return C * C / (4.0 * n) + C / math.sqrt(n)


def copies_for_target(C: float, eps: float) -> int:
    """Smallest ``n`` with ``finite_copy_infidelity(C, n) <= eps``.

    Solves ``C^2 x^2 / 4 + C x = eps`` for ``x = 1/sqrt(n)``, then corrects the
    rounded answer against the bound itself.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidArgumentError("eps must lie in (0, 1)")
    if C < 0:
        raise InvalidArgumentError("C must be nonnegative")
    if C == 0:
        return 1
    # 2 (sqrt(1 + eps) - 1) / C, written without the cancellation
    x = 2.0 * eps / (C * (math.sqrt(1.0 + eps) + 1.0))
    n = max(1, math.ceil(1.0 / (x * x)))
    while n > 1 and finite_copy_infidelity(C, n - 1) <= eps:
        n -= 1
    while finite_copy_infidelity(C, n) > eps:
        n += 1
    return n


def bound_constant(rho0, h: HamiltonianSpec | None = None,
                   threshold: float = TOL.mode_threshold, noisy=None) -> float:
    """``d * C_l1(rho0) / min |rho_ij|`` over present off-diagonal entries.

    The minimum is taken over ``noisy`` when given (the state the copies are
    drawn from), otherwise over ``rho0``.

    Raises:
        UndefinedBoundError: no off-diagonal entry exceeds ``threshold``.
    """
    rho0 = check_density_matrix(rho0, name="rho0")
    src = rho0 if noisy is None else check_density_matrix(noisy, name="noisy")
    if src.shape != rho0.shape:
        raise InvalidArgumentError("noisy and rho0 differ in dimension")
    if h is not None and h.dim != rho0.shape[0]:
        raise InvalidArgumentError(f"Hamiltonian dim {h.dim} != state dim {rho0.shape[0]}")
    mags = np.abs(src[~np.eye(src.shape[0], dtype=bool)])
    present = mags[mags > threshold]
    if present.size == 0:
        raise UndefinedBoundError("state has no coherence above the threshold")
    return float(rho0.shape[0] * l1_coherence(rho0) / present.min())


def copy_mu(rho_min_offdiag: float) -> float:
    if not rho_min_offdiag > 0:
        raise UndefinedBoundError("copy overhead needs a positive coherence magnitude")
    return 1.0 / rho_min_offdiag**2


@dataclass(frozen=True)
class PowerLawFit:
    coefficient: float
    exponent: float
    r_squared: float

    def predict(self, d):
        return self.coefficient * np.asarray(d, dtype=float) ** self.exponent


def power_law_fit(points) -> PowerLawFit:
    """Least-squares line through ``(log d, log C)``.

    Raises:
        FitError: fewer than two distinct abscissae or non-positive values.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise FitError("points must be (d, C) pairs")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise FitError("power-law fit needs positive finite values")
    if np.unique(pts[:, 0]).size < 2:
        raise FitError("need at least two distinct d values")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return PowerLawFit(float(np.exp(intercept)), float(slope), r2)
