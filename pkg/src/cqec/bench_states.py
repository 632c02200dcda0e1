"""Deterministic generators for the benchmark target states.

Several generators are surrogates for algorithms whose full pipelines are
out of scope; the construction of each is fixed here so runs are reproducible.
Qubit ``q`` is bit ``q`` of the amplitude index throughout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.linalg import expm

from .exceptions import InvalidArgumentError

__all__ = [
    "Algorithm",
    "BenchmarkSpec",
    "BENCHMARK_DIMS",
    "TTN_LENGTHS",
    "qkan_state",
    "qdrift_hamiltonian_terms",
    "qdrift_state",
    "cfqpe_hamiltonian",
    "cfqpe_series",
    "cfqpe_state",
    "regev_grid",
    "regev_state",
    "ttn_state",
    "benchmark_state",
]

_I = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.diag([1.0, -1.0]).astype(np.complex128)


class Algorithm(enum.Enum):
    QKAN = "qkan"
    QDRIFT = "qdrift"
    CFQPE = "cfqpe"
    REGEV = "regev"
    TTN = "ttn"


BENCHMARK_DIMS = {
    Algorithm.QKAN: 4,
    Algorithm.QDRIFT: 8,
    Algorithm.CFQPE: 16,
    Algorithm.REGEV: 64,
    Algorithm.TTN: 8,
}

TTN_LENGTHS = (5, 10, 15, 20, 25, 30)


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _op_on(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Tensor product with ``ops[q]`` on qubit ``q`` (identity elsewhere)."""
    # kron order puts the highest qubit leftmost
    return reduce(np.kron, [ops.get(q, _I) for q in reversed(range(n))])


def _plus(n: int) -> np.ndarray:
    return np.full(2**n, 2 ** (-n / 2), dtype=np.complex128)


def qkan_state(truncated: bool = True) -> np.ndarray:
    """Chebyshev values ``(T0, T1, T2, T3)`` at ``x = 0.5``, optionally cut at degree 2."""
    amps = np.array([1.0, 0.5, -0.5, -1.0], dtype=np.complex128)
    if truncated:
        amps[3] = 0.0
    return _normalize(amps)


def qdrift_hamiltonian_terms(J: float = 1.0, h: float = 0.5, n: int = 3):
    """Pauli terms ``(coefficient, matrix)`` of the open Heisenberg chain with a Z field."""
    terms = []
    for i in range(n - 1):
        for p in (_X, _Y, _Z):
            terms.append((J, _op_on({i: p, i + 1: p}, n)))
    for i in range(n):
        terms.append((h, _op_on({i: _Z}, n)))
    return terms


def qdrift_state(seed: int = 0, exact: bool = False, *, n_gates: int = 80,
                 t: float = 1.0) -> np.ndarray:
    """Heisenberg evolution of ``|+++>``, exact or via a sampled qDRIFT sequence.

    The sampled sequence applies ``n_gates`` factors ``exp(-i (lambda t / N) P_j)``
    with ``P_j`` drawn with probability ``|c_j| / lambda``.
    """
    terms = qdrift_hamiltonian_terms()
    psi = _plus(3)
    if exact:
        H = sum(c * P for c, P in terms)
        return _normalize(expm(-1j * t * H) @ psi)
    coeffs = np.array([abs(c) for c, _ in terms])
    lam = coeffs.sum()
    tau = lam * t / n_gates
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(terms), size=n_gates, p=coeffs / lam)
    for j in picks:
        c, P = terms[j]
        # P squares to I, so exp(-i a P) = cos a I - i sin a P
        a = np.sign(c) * tau
        psi = np.cos(a) * psi - 1j * np.sin(a) * (P @ psi)
    return _normalize(psi)


def _annihilators(n_modes: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilation operators, mode ``q`` on qubit ``q``."""
    lower = np.array([[0, 1], [0, 0]], dtype=np.complex128)  # |0><1|
    out = []
    for q in range(n_modes):
        ops = {k: _Z for k in range(q)}
        ops[q] = lower
        out.append(_op_on(ops, n_modes))
    return out


def cfqpe_hamiltonian(hopping: float = 1.0, interaction: float = 2.0) -> np.ndarray:
    """Two-site Hubbard model on four qubits.

    Modes are ordered (site0 up, site1 up, site0 down, site1 down).
    """
    a = _annihilators(4)
    n = [ai.conj().T @ ai for ai in a]
    H = np.zeros((16, 16), dtype=np.complex128)
    for s0, s1 in ((0, 1), (2, 3)):
        hop = a[s0].conj().T @ a[s1]
        H -= hopping * (hop + hop.conj().T)
    H += interaction * (n[0] @ n[2] + n[1] @ n[3])
    return H


def cfqpe_series(hopping: float = 1.0, interaction: float = 2.0, dt: float = 0.4,
                 length: int = 16) -> np.ndarray:
    """``f_j = <psi| exp(-i H j dt) |psi>`` for ``j = 0..length-1`` with ``psi = |+>^4``."""
    H = cfqpe_hamiltonian(hopping, interaction)
    lam, vecs = np.linalg.eigh(H)
    w = np.abs(vecs.conj().T @ _plus(4)) ** 2
    j = np.arange(length)
    return np.exp(-1j * np.outer(j * dt, lam)) @ w


def cfqpe_state(hopping: float = 1.0, interaction: float = 2.0, dt: float = 0.4) -> np.ndarray:
    """Sixteen time-series samples encoded as normalized amplitudes."""
    return _normalize(cfqpe_series(hopping, interaction, dt, 16))


def regev_grid(D: int = 8, s: float = 2.0) -> np.ndarray:
    """Centered Gaussian ``exp(-pi |x|^2 / s^2)`` on a ``D x D`` grid, indexed ``[z2, z1]``."""
    x = np.arange(D) - (D - 1) / 2.0
    r2 = x[:, None] ** 2 + x[None, :] ** 2
    return np.exp(-np.pi * r2 / s**2)


def regev_state(D: int = 8, *, s: float = 2.0, modulus: int = 15, bases=(4, 9),
                residue: int = 6) -> np.ndarray:
    """Gaussian grid, modular-exponentiation projection, then a 2-D Fourier transform.

    The value register ``b1^z1 b2^z2 mod N`` is replaced by a projection onto
    one fixed residue so the output is deterministic.
    """
    if D != 8:
        raise InvalidArgumentError("only D = 8 (64 amplitudes) is supported")
    g = regev_grid(D, s).astype(np.complex128)
    z = np.arange(D)
    b1, b2 = bases
    value = (pow_table(b1, z, modulus)[None, :] * pow_table(b2, z, modulus)[:, None]) % modulus
    g[value != residue] = 0.0
    if not np.any(g):
        raise InvalidArgumentError(f"residue {residue} never occurs")
    spec = np.fft.fft2(g, norm="ortho")
    # spec[z2, z1] flattened row-major gives index z1 + D*z2
    return _normalize(spec.ravel())


def pow_table(base: int, exps: np.ndarray, modulus: int) -> np.ndarray:
    return np.array([pow(int(base), int(e), modulus) for e in exps])


def _ttn_angle(layer: int, slot: int, plaintext_len: int, seed: int) -> float:
    frac = np.modf(np.sin(seed + 31 * layer + 7 * slot) * plaintext_len / 30.0)[0]
    return 2.0 * np.pi * frac


def ttn_state(plaintext_len: int, seed: int = 0, *, layers: int = 2) -> np.ndarray:
    """Three-qubit layered RY, CNOT chain, RZ circuit applied to ``|000>``.

    Angle schedule: ``2 pi frac(sin(seed + 31 l + 7 k) * len / 30)`` for layer
    ``l`` and slot ``k``; slots 0-2 feed RY and 3-5 feed RZ.
    """
    if plaintext_len not in TTN_LENGTHS:
        raise InvalidArgumentError(f"plaintext_len must be one of {TTN_LENGTHS}")
    n = 3
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    for layer in range(layers):
        for q in range(n):
            a = _ttn_angle(layer, q, plaintext_len, seed)
            ry = np.array([[np.cos(a / 2), -np.sin(a / 2)], [np.sin(a / 2), np.cos(a / 2)]])
            psi = _op_on({q: ry}, n) @ psi
        for q in range(n - 1):
            psi = _cnot(n, q, q + 1) @ psi
        for q in range(n):
            a = _ttn_angle(layer, q + n, plaintext_len, seed)
            rz = np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
            psi = _op_on({q: rz}, n) @ psi
    return _normalize(psi)


def _cnot(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    flipped = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    P = np.zeros((2**n, 2**n))
    P[flipped, idx] = 1.0
    return P


@dataclass(frozen=True)
class BenchmarkSpec:
    name: Algorithm
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "name", Algorithm(self.name))

    @property
    def d(self) -> int:
        return BENCHMARK_DIMS[self.name]

    def state(self) -> np.ndarray:
        return benchmark_state(self.name, self.seed, **self.params)


def benchmark_state(name, seed: int = 0, **params) -> np.ndarray:
    """Target state of a named benchmark."""
    alg = Algorithm(name)
    if alg is Algorithm.QKAN:
        return qkan_state(**params)
    if alg is Algorithm.QDRIFT:
        return qdrift_state(seed, **params)
    if alg is Algorithm.CFQPE:
        return cfqpe_state(**params)
    if alg is Algorithm.REGEV:
        return regev_state(**params)
    params.setdefault("plaintext_len", 5)
    return ttn_state(seed=seed, **params)
