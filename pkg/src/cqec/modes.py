"""Modes of asymmetry, their integer span, and the recoverability verdict."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from ._constants import TOL
from ._validation import check_density_matrix
from .exceptions import InvalidArgumentError
from .qstate import HamiltonianSpec

__all__ = [
    "ModeSet",
    "ResonantSpan",
    "RecoverabilityDecision",
    "mode_set",
    "resonant_span",
    "span_included",
    "check_recoverable",
    "is_full_rank",
]


@dataclass(frozen=True)
class ModeSet:
    """Signed nonzero energy gaps at which a state carries coherence."""

    gaps: tuple[int, ...]
    threshold: float = TOL.mode_threshold

    def __post_init__(self):
        gaps = tuple(sorted(set(int(g) for g in self.gaps)))
        if 0 in gaps:
            raise InvalidArgumentError("a mode set cannot contain the zero gap")
        if set(gaps) != {-g for g in gaps}:
            raise InvalidArgumentError("mode sets must be closed under negation")
        object.__setattr__(self, "gaps", gaps)

    def __contains__(self, gap) -> bool:
        return int(gap) in self.gaps

    def __len__(self) -> int:
        return len(self.gaps)

    @property
    def positive(self) -> tuple[int, ...]:
        return tuple(g for g in self.gaps if g > 0)


@dataclass(frozen=True)
class ResonantSpan:
    """The subgroup ``g Z`` of the integers; ``g = 0`` is the trivial group."""

    generator: int

    def __post_init__(self):
        if int(self.generator) != self.generator or self.generator < 0:
            raise InvalidArgumentError("generator must be a nonnegative integer")
        object.__setattr__(self, "generator", int(self.generator))

    def __contains__(self, value) -> bool:
        g = self.generator
        return value == 0 if g == 0 else int(value) % g == 0


@dataclass(frozen=True)
class RecoverabilityDecision:
    recoverable: bool
    span_included: bool
    full_rank: bool
    missing_gaps: frozenset
    target_span: ResonantSpan
    source_span: ResonantSpan


def mode_set(rho, h: HamiltonianSpec, threshold: float = TOL.mode_threshold) -> ModeSet:
    """Gaps ``E_i - E_j`` for every pair with ``|rho_ij| > threshold``."""
    rho = check_density_matrix(rho, check_psd=False)
    if h.dim != rho.shape[0]:
        raise InvalidArgumentError(f"Hamiltonian dim {h.dim} != state dim {rho.shape[0]}")
    gaps = h.gaps()
    present = (np.abs(rho) > threshold) & (gaps != 0)
    return ModeSet(tuple(np.unique(gaps[present]).tolist()), threshold)


def resonant_span(m: ModeSet) -> ResonantSpan:
    g = 0
    for gap in m.positive:
        g = gcd(g, gap)
    return ResonantSpan(g)


def span_included(target: ResonantSpan, source: ResonantSpan) -> bool:
    """True iff ``target`` is a subgroup of ``source``."""
    if source.generator == 0:
        return target.generator == 0
    return target.generator % source.generator == 0


def is_full_rank(rho, tol: float = TOL.full_rank) -> bool:
    rho = check_density_matrix(rho)
    return bool(np.linalg.eigvalsh(rho)[0] > tol)


def check_recoverable(target, noisy, h: HamiltonianSpec,
                      threshold: float = TOL.mode_threshold) -> RecoverabilityDecision:
    """Decide whether ``noisy`` can be catalytically restored to ``target``.

    The verdict requires span inclusion and a full-rank noisy state.
    ``missing_gaps`` compares raw gap sets and is diagnostic only.
    """
    target = check_density_matrix(target, name="target")
    noisy = check_density_matrix(noisy, name="noisy")
    m_t = mode_set(target, h, threshold)
    m_s = mode_set(noisy, h, threshold)
    span_t, span_s = resonant_span(m_t), resonant_span(m_s)
    included = span_included(span_t, span_s)
    full = is_full_rank(noisy)
    missing = frozenset(g for g in m_t.positive if g not in m_s)
    return RecoverabilityDecision(
        recoverable=included and full,
        span_included=included,
        full_rank=full,
        missing_gaps=missing,
        target_span=span_t,
        source_span=span_s,
    )
