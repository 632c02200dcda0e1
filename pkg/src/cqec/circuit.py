"""Energy-conserving two-qubit gates and the layered recovery circuit.

Qubits are numbered globally: system ``0..nS-1``, catalyst ``nS..nS+nC-1``,
ancilla after that. Qubit ``q`` is bit ``q`` of the joint basis index, so the
joint space is ``kron(ancilla, catalyst, system)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import check_density_matrix
from .exceptions import InvalidArgumentError
from .qstate import HamiltonianSpec, PureEnsemble, partial_trace

__all__ = [
    "Layer",
    "ECGate",
    "ECCircuit",
    "ec_gate_matrix",
    "build_minimal",
    "build_layered",
    "layered_pairs",
    "n_layered_params",
    "circuit_unitary",
    "covariance_defect",
    "apply",
    "apply_statevectors",
    "apply_statevectors_rowwise",
    "joint_input",
    "joint_ensemble",
    "reduced_states",
    "energy_expectation",
]

TWO_PI = 2.0 * np.pi


class Layer(enum.IntEnum):
    L1 = 1  # system <-> catalyst
    L2 = 2  # catalyst <-> ancilla
    L3 = 3  # system <-> ancilla


def ec_gate_matrix(theta: float) -> np.ndarray:
    """Rotation inside ``span{|01>, |10>}``; iSWAP-like at ``theta = pi/2``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, 1]],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class ECGate:
    qubit_a: int
    qubit_b: int
    theta: float
    layer: Layer

    def __post_init__(self):
        if self.qubit_a == self.qubit_b:
            raise InvalidArgumentError("an EC gate needs two distinct qubits")
        if self.qubit_a < 0 or self.qubit_b < 0:
            raise InvalidArgumentError("qubit indices must be nonnegative")
        theta = float(self.theta) % TWO_PI
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "layer", Layer(self.layer))


@dataclass(frozen=True)
class ECCircuit:
    n_system: int
    n_catalyst: int
    n_ancilla: int
    gates: tuple[ECGate, ...] = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if min(self.n_system, self.n_catalyst, self.n_ancilla) < 0:
            raise InvalidArgumentError("register sizes must be nonnegative")
        n = self.n_qubits
        for g in gates:
            if g.qubit_a >= n or g.qubit_b >= n:
                raise InvalidArgumentError(f"gate {g} out of range for {n} qubits")
        # layer tags must not go backwards within one L1-L2-L3 block; a new block
        # may restart at L1
        for prev, cur in zip(gates, gates[1:]):
            if cur.layer < prev.layer and cur.layer is not Layer.L1:
                raise InvalidArgumentError("gate layers must follow L1, L2, L3 order")

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_catalyst + self.n_ancilla

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def thetas(self) -> np.ndarray:
        return np.array([g.theta for g in self.gates])

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(g.qubit_a, g.qubit_b) for g in self.gates]

    def __len__(self) -> int:
        return len(self.gates)

    def with_thetas(self, thetas) -> "ECCircuit":
        thetas = np.asarray(thetas, dtype=float).ravel()
        if thetas.size != len(self.gates):
            raise InvalidArgumentError(f"expected {len(self.gates)} angles, got {thetas.size}")
        gates = tuple(ECGate(g.qubit_a, g.qubit_b, t, g.layer) for g, t in zip(self.gates, thetas))
        return ECCircuit(self.n_system, self.n_catalyst, self.n_ancilla, gates)


def layered_pairs(n_s: int, n_c: int, n_a: int, depth: int = 1) -> list[tuple[int, int, Layer]]:
    """Gate placements of the layered ansatz, ``depth`` repetitions of L1, L2, L3."""
    if not 1 <= depth:
        raise InvalidArgumentError("depth must be at least 1")
    sys_q = range(n_s)
    cat_q = range(n_s, n_s + n_c)
    anc_q = range(n_s + n_c, n_s + n_c + n_a)
    block = (
        [(s, c, Layer.L1) for s in sys_q for c in cat_q]
        + [(c, a, Layer.L2) for c in cat_q for a in anc_q]
        + [(s, a, Layer.L3) for s in sys_q for a in anc_q]
    )
    return block * depth


def n_layered_params(n_s: int, n_c: int, n_a: int, depth: int = 1) -> int:
    return depth * (n_s * n_c + n_c * n_a + n_s * n_a)


def build_layered(n_s: int, n_c: int, n_a: int, theta_table, depth: int = 1) -> ECCircuit:
    """Full product circuit: every S-C pair, then C-A, then S-A, repeated ``depth`` times."""
    thetas = np.asarray(theta_table, dtype=float).ravel()
    expected = n_layered_params(n_s, n_c, n_a, depth)
    if thetas.size != expected:
        raise InvalidArgumentError(f"expected {expected} angles, got {thetas.size}")
    gates = tuple(ECGate(a, b, t, layer)
                  for (a, b, layer), t in zip(layered_pairs(n_s, n_c, n_a, depth), thetas))
    return ECCircuit(n_s, n_c, n_a, gates)


def build_minimal(theta_vec) -> ECCircuit:
    """One system, one catalyst and two ancilla qubits with five gates."""
    thetas = np.asarray(theta_vec, dtype=float).ravel()
    if thetas.size != 5:
        raise InvalidArgumentError(f"the minimal circuit takes 5 angles, got {thetas.size}")
    return build_layered(1, 1, 2, thetas)


def _ec_inplace(psi: np.ndarray, n: int, qa: int, qb: int, theta: float) -> None:
    """Rotate the ``|01>, |10>`` amplitudes of qubits ``qa, qb`` for every row of ``psi``.

    The gate is symmetric under exchanging its qubits, so only the bit
    positions matter.
    """
    lo, hi = sorted((qa, qb))
    m = psi.shape[0]
    t = psi.reshape(m, 2 ** (n - 1 - hi), 2, 2 ** (hi - 1 - lo), 2, 2**lo)
    x = t[:, :, 0, :, 1, :]
    y = t[:, :, 1, :, 0, :]
    theta = np.asarray(theta, dtype=float)
    if theta.ndim:
        # one angle per row
        theta = theta.reshape(m, 1, 1, 1)
    c, s = np.cos(theta), -1j * np.sin(theta)
    x_new = c * x + s * y
    y *= c
    y += s * x
    x[...] = x_new


def apply_statevectors(pairs, thetas, psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply EC gates to each row of ``psi`` (shape ``(m, 2**n)``); returns a new array."""
    out = np.array(psi, dtype=np.complex128, copy=True)
    for (a, b), th in zip(pairs, thetas):
        if th != 0.0:
            _ec_inplace(out, n_qubits, a, b, th)
    return out


def apply_statevectors_rowwise(pairs, theta_rows: np.ndarray, psi: np.ndarray,
                               n_qubits: int) -> np.ndarray:
    """Like :func:`apply_statevectors` with a separate angle vector per row.

    ``theta_rows`` has shape ``(m, n_gates)``; used to evaluate many circuits
    of the same shape in one pass.
    """
    out = np.array(psi, dtype=np.complex128, copy=True)
    theta_rows = np.asarray(theta_rows, dtype=float)
    for k, (a, b) in enumerate(pairs):
        _ec_inplace(out, n_qubits, a, b, theta_rows[:, k])
    return out


def circuit_unitary(c: ECCircuit) -> np.ndarray:
    eye = np.eye(c.dim, dtype=np.complex128)
    # rows of the result are U|k>, i.e. columns of U
    return apply_statevectors(c.pairs, c.thetas, eye, c.n_qubits).T


def _embed_single(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(2 ** (n - 1 - qubit)), gate), np.eye(2**qubit))


def covariance_defect(c: ECCircuit, h: HamiltonianSpec | None = None, *, inject=None) -> float:
    """Frobenius norm of ``[U, H]``.

    Args:
        c: circuit.
        h: Hamiltonian on all registers; defaults to ``sum_q Z_q``.
        inject: optional ``(qubit, 2x2 matrix)`` applied after the circuit, a
            hook for negative controls.
    """
    if h is None:
        h = HamiltonianSpec.qubit_sum_z(c.n_qubits)
    if h.dim != c.dim:
        raise InvalidArgumentError(f"Hamiltonian dim {h.dim} != circuit dim {c.dim}")
    u = circuit_unitary(c)
    if inject is not None:
        qubit, gate = inject
        u = _embed_single(np.asarray(gate, dtype=np.complex128), int(qubit), c.n_qubits) @ u
    e = h.diag
    comm = u * e[None, :] - e[:, None] * u
    return float(np.linalg.norm(comm))


def apply(c: ECCircuit, state):
    """Evolve a joint state; returns the same representation as given."""
    if isinstance(state, PureEnsemble):
        if state.dim != c.dim:
            raise InvalidArgumentError(f"ensemble dim {state.dim} != circuit dim {c.dim}")
        members = apply_statevectors(c.pairs, c.thetas, state.members, c.n_qubits)
        # renormalize to absorb rounding so the ensemble invariant holds exactly
        members /= np.linalg.norm(members, axis=1, keepdims=True)
        return PureEnsemble(state.weights, members)
    rho = check_density_matrix(state, check_psd=False)
    if rho.shape[0] != c.dim:
        raise InvalidArgumentError(f"state dim {rho.shape[0]} != circuit dim {c.dim}")
    u = circuit_unitary(c)
    return u @ rho @ u.conj().T


def _ancilla_zero(n_a: int) -> np.ndarray:
    v = np.zeros(2**n_a, dtype=np.complex128)
    v[0] = 1.0
    return v


def joint_input(system, catalyst, n_ancilla: int) -> np.ndarray:
    """Dense ``kron(|0..0><0..0|_A, catalyst, system)``."""
    s = check_density_matrix(system, name="system")
    cat = check_density_matrix(catalyst, name="catalyst")
    a = _ancilla_zero(n_ancilla)
    return np.kron(np.outer(a, a), np.kron(cat, s))


def joint_ensemble(system, catalyst, n_ancilla: int) -> PureEnsemble:
    """Same joint state as :func:`joint_input`, as a product of spectral ensembles."""
    es = PureEnsemble.from_density(system)
    ec = PureEnsemble.from_density(catalyst)
    a = _ancilla_zero(n_ancilla)
    members = np.einsum("a,jc,is->jiacs", a, ec.members, es.members)
    members = members.reshape(ec.rank * es.rank, -1)
    weights = np.outer(ec.weights, es.weights).ravel()
    return PureEnsemble(weights / weights.sum(), members)


def reduced_states(state, c: ECCircuit) -> tuple[np.ndarray, np.ndarray]:
    """System and catalyst marginals of a joint state."""
    d_s, d_c, d_a = 2**c.n_system, 2**c.n_catalyst, 2**c.n_ancilla
    if isinstance(state, PureEnsemble):
        m = state.members.reshape(state.rank, d_a, d_c, d_s)
        w = state.weights
        rho_s = np.einsum("m,macs,macz->sz", w, m, m.conj())
        rho_c = np.einsum("m,macs,mads->cd", w, m, m.conj())
        return rho_s, rho_c
    dims = [d_a, d_c, d_s]
    return partial_trace(state, dims, [2]), partial_trace(state, dims, [1])


def energy_expectation(state, h: HamiltonianSpec) -> float:
    if isinstance(state, PureEnsemble):
        probs = np.abs(state.members) ** 2
        return float(state.weights @ probs @ h.diag)
    rho = np.asarray(state)
    return float(np.real(np.diag(rho)) @ h.diag)

