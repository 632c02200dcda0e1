"""Variational catalyst preparation.

The catalyst is ``U(theta)|0>`` where ``U`` is a product of two-level
rotations over every level pair, repeated for ``L`` layers. The cost rewards
l1-coherence, penalizes target modes the catalyst lacks, and penalizes small
populations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, TransformerMixin

from ._constants import TOL
from ._validation import check_density_matrix, check_state_vector
from .exceptions import InvalidArgumentError, UnsupportedDimensionError
from .modes import ModeSet, mode_set
from .qstate import HamiltonianSpec, l1_coherence

__all__ = [
    "CatalystWeights",
    "CatalystBudget",
    "CatalystReport",
    "n_ansatz_params",
    "ansatz_state",
    "ansatz_vector",
    "catalyst_cost",
    "mode_coverage",
    "optimize_catalyst",
    "restart_rng",
    "VariationalCatalyst",
    "MAX_VARIATIONAL_DIM",
]

MAX_VARIATIONAL_DIM = 16
LOG_FLOOR = np.log(1e-300)
GRAD_STEP = 1e-6


@dataclass(frozen=True)
class CatalystWeights:
    coherence: float = 1.0
    missing: float = 10.0
    population: float = 5.0


@dataclass(frozen=True)
class CatalystBudget:
    layers: int = 3
    restarts: int = 5
    maxiter: int = 200


@dataclass(frozen=True)
class CatalystReport:
    state: np.ndarray
    vector: np.ndarray
    l1: float
    mode_coverage: float
    rho_min: float
    cost: float
    params: np.ndarray
    restart: int = 0
    history: tuple = field(default=(), repr=False)


def n_ansatz_params(d: int, layers: int) -> int:
    return 2 * layers * d * (d - 1) // 2


def _pairs(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def _ansatz_batch(d: int, layers: int, params: np.ndarray) -> np.ndarray:
    """States for a batch of parameter vectors, shape ``(B, P) -> (B, d)``.

    Parameters are laid out per layer and per pair ``i < j`` as ``(theta, phi)``;
    the first listed rotation acts first on ``|0>``.
    """
    batch = params.shape[0]
    # level-major layout keeps each level's batch contiguous
    psi = np.zeros((d, batch), dtype=np.complex128)
    psi[0] = 1.0
    th = params[:, 0::2].T
    ph = params[:, 1::2].T
    c = np.cos(th)
    s_fwd = -np.exp(1j * ph) * np.sin(th)
    s_bwd = np.exp(-1j * ph) * np.sin(th)
    g = 0
    pairs = _pairs(d)
    for _ in range(layers):
        for i, j in pairs:
            a = psi[i].copy()
            b = psi[j]
            psi[i] = c[g] * a + s_fwd[g] * b
            psi[j] = s_bwd[g] * a + c[g] * b
            g += 1
    return psi.T


def _check_params(d: int, layers: int, params) -> np.ndarray:
    if d < 1 or layers < 0:
        raise InvalidArgumentError("need d >= 1 and layers >= 0")
    params = np.asarray(params, dtype=float).ravel()
    expected = n_ansatz_params(d, layers)
    if params.size != expected:
        raise InvalidArgumentError(f"expected {expected} parameters, got {params.size}")
    return params


def ansatz_vector(d: int, layers: int, params) -> np.ndarray:
    params = _check_params(d, layers, params)
    return _ansatz_batch(d, layers, params[None, :])[0]


def ansatz_state(d: int, layers: int, params) -> np.ndarray:
    """Density matrix ``U(theta)|0><0|U(theta)^dagger``."""
    psi = ansatz_vector(d, layers, params)
    return np.outer(psi, psi.conj())


def mode_coverage(state, target_modes: ModeSet, h: HamiltonianSpec) -> float:
    """Fraction of the target's positive gaps present in ``state``."""
    wanted = target_modes.positive
    if not wanted:
        return 1.0
    have = mode_set(state, h, target_modes.threshold)
    return sum(g in have for g in wanted) / len(wanted)


def _costs_from_vectors(psi: np.ndarray, wanted: np.ndarray, gaps: np.ndarray,
                        threshold: float, w: CatalystWeights) -> np.ndarray:
    """Batched cost for pure catalysts ``psi`` of shape ``(B, d)``."""
    d = psi.shape[1]
    amp = np.abs(psi)
    # sum_{i != j} |psi_i||psi_j| = (sum |psi_i|)^2 - sum |psi_i|^2
    l1 = amp.sum(axis=1) ** 2 - (amp**2).sum(axis=1)
    cost = -w.coherence * l1 / max(d - 1, 1)
    if wanted.size and w.missing:
        present = (amp[:, :, None] * amp[:, None, :] > threshold).reshape(psi.shape[0], -1)
        # incidence of each level pair with each wanted gap
        incidence = (gaps.reshape(-1, 1) == wanted[None, :]).astype(float)
        missing = np.count_nonzero(present.astype(float) @ incidence == 0, axis=1)
        cost = cost + w.missing * missing / wanted.size
    if w.population:
        rho_min = (amp**2).min(axis=1)
        cost = cost - w.population * np.maximum(np.log(np.maximum(rho_min, 1e-300)), LOG_FLOOR)
    return cost


def catalyst_cost(state, target_modes: ModeSet, weights=CatalystWeights(),
                  h: HamiltonianSpec | None = None) -> float:
    """``-w1 C_l1/(d-1) + w2 missing_fraction - w3 log(rho_min)``.

    ``log`` is floored at ``log(1e-300)`` so a zero population gives a large
    finite penalty. ``h`` defaults to the ladder ``0..d-1``.
    """
    rho = check_density_matrix(state)
    d = rho.shape[0]
    h = HamiltonianSpec.linear_ladder(d) if h is None else h
    w = weights if isinstance(weights, CatalystWeights) else CatalystWeights(*weights)
    cost = -w.coherence * l1_coherence(rho) / max(d - 1, 1)
    if target_modes.positive and w.missing:
        cost += w.missing * (1.0 - mode_coverage(rho, target_modes, h))
    if w.population:
        rho_min = float(np.min(np.diag(rho).real))
        cost -= w.population * max(np.log(max(rho_min, 1e-300)), LOG_FLOOR)
    return float(cost)


def restart_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for restart ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def optimize_catalyst(d: int, target_modes: ModeSet, budget: CatalystBudget = CatalystBudget(),
                      seed: int = 0, weights: CatalystWeights = CatalystWeights(),
                      h: HamiltonianSpec | None = None) -> CatalystReport:
    """Best of several seeded L-BFGS-B restarts with central-difference gradients.

    Raises:
        UnsupportedDimensionError: ``d`` above 16; use the purification
            pipeline for larger catalysts.
    """
    if d > MAX_VARIATIONAL_DIM:
        raise UnsupportedDimensionError(
            f"variational catalysts are limited to d <= {MAX_VARIATIONAL_DIM}; "
            "prepare larger catalysts with the purification pipeline"
        )
    if d < 2:
        raise InvalidArgumentError("d must be at least 2")
    h = HamiltonianSpec.linear_ladder(d) if h is None else h
    if h.dim != d:
        raise InvalidArgumentError(f"Hamiltonian dim {h.dim} != d={d}")
    layers = budget.layers
    n_par = n_ansatz_params(d, layers)
    wanted = np.asarray(target_modes.positive, dtype=np.int64)
    gaps = np.abs(h.gaps())
    thr = target_modes.threshold

    def cost_batch(x: np.ndarray) -> np.ndarray:
        return _costs_from_vectors(_ansatz_batch(d, layers, x), wanted, gaps, thr, weights)

    eye = np.eye(n_par) * GRAD_STEP

    def fun_and_grad(x: np.ndarray):
        batch = np.vstack([x[None, :], x + eye, x - eye])
        vals = cost_batch(batch)
        grad = (vals[1:n_par + 1] - vals[n_par + 1:]) / (2.0 * GRAD_STEP)
        return float(vals[0]), grad

    best = None
    for r in range(budget.restarts):
        x0 = restart_rng(seed, r).uniform(0.0, 2.0 * np.pi, n_par)
        history = [fun_and_grad(x0)[0]]
        res = minimize(fun_and_grad, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": budget.maxiter},
                       callback=lambda xk: history.append(float(cost_batch(xk[None, :])[0])))
        val = float(cost_batch(res.x[None, :])[0])
        # strict improvement keeps the lowest restart index on ties
        if best is None or val < best[0]:
            best = (val, r, res.x.copy(), tuple(history))
    val, r, x, history = best
    psi = ansatz_vector(d, layers, x)
    rho = np.outer(psi, psi.conj())
    return CatalystReport(
        state=rho,
        vector=psi,
        l1=l1_coherence(rho),
        mode_coverage=mode_coverage(rho, target_modes, h),
        rho_min=float(np.min(np.abs(psi) ** 2)),
        cost=catalyst_cost(rho, target_modes, weights, h),
        params=x,
        restart=r,
        history=history,
    )


class VariationalCatalyst(TransformerMixin, BaseEstimator):
    """Estimator wrapper: ``fit`` on a target state, ``transform`` returns the catalyst.

    Parameters mirror :func:`optimize_catalyst`. After fitting, ``report_``
    holds the :class:`CatalystReport` and ``catalyst_`` the density matrix.
    """

    def __init__(self, layers: int = 3, restarts: int = 5, maxiter: int = 200,
                 weights=(1.0, 10.0, 5.0), threshold: float = TOL.mode_threshold,
                 random_state: int = 0):
        self.layers = layers
        self.restarts = restarts
        self.maxiter = maxiter
        self.weights = weights
        self.threshold = threshold
        self.random_state = random_state

    def fit(self, X, y=None):
        arr = np.asarray(X)
        rho = (np.outer(v := check_state_vector(arr), v.conj()) if arr.ndim == 1
               else check_density_matrix(arr))
        d = rho.shape[0]
        h = HamiltonianSpec.linear_ladder(d)
        self.target_modes_ = mode_set(rho, h, self.threshold)
        self.report_ = optimize_catalyst(
            d, self.target_modes_,
            CatalystBudget(self.layers, self.restarts, self.maxiter),
            seed=self.random_state, weights=CatalystWeights(*self.weights), h=h,
        )
        self.catalyst_ = self.report_.state
        self.n_features_in_ = d
        return self

    def transform(self, X):
        """Return the fitted catalyst; ``X`` is accepted for pipeline compatibility."""
        if not hasattr(self, "catalyst_"):
            raise InvalidArgumentError("call fit before transform")
        return self.catalyst_.copy()
