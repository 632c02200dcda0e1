import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqec.exceptions import InvalidArgumentError
from cqec.modes import (
    ModeSet,
    ResonantSpan,
    check_recoverable,
    is_full_rank,
    mode_set,
    resonant_span,
    span_included,
)
from cqec.noise import dephase, depolarize, selective_dephase
from cqec.qstate import HamiltonianSpec, maximally_coherent, projector

LADDER4 = HamiltonianSpec.linear_ladder(4)


def test_mode_set_maximally_coherent():
    m = mode_set(projector(maximally_coherent(4)), LADDER4)
    assert m.gaps == (-3, -2, -1, 1, 2, 3)
    assert m.positive == (1, 2, 3)


def test_mode_set_diagonal_is_empty():
    m = mode_set(np.diag([0.25] * 4), LADDER4)
    assert len(m) == 0
    assert resonant_span(m).generator == 0


def test_mode_set_validation():
    with pytest.raises(InvalidArgumentError):
        ModeSet((1,))
    with pytest.raises(InvalidArgumentError):
        ModeSet((0,))


def test_span_gcd():
    assert resonant_span(ModeSet((-6, -4, 4, 6))).generator == 2
    assert 8 in ResonantSpan(2) and 3 not in ResonantSpan(2)
    assert span_included(ResonantSpan(4), ResonantSpan(2))
    assert not span_included(ResonantSpan(1), ResonantSpan(2))
    assert span_included(ResonantSpan(0), ResonantSpan(0))
    assert not span_included(ResonantSpan(1), ResonantSpan(0))


def test_selective_dephasing_not_recoverable():
    rho0 = projector(maximally_coherent(4))
    noisy = selective_dephase(rho0, LADDER4, 1)
    dec = check_recoverable(rho0, noisy, LADDER4)
    assert mode_set(noisy, LADDER4).positive == (2, 3)
    # gcd(2, 3) = 1, so the span still covers every target gap; the noisy
    # state is not full rank, which fails the verdict
    assert dec.span_included
    assert dec.missing_gaps == frozenset({1})
    assert not dec.recoverable


def test_depolarized_is_recoverable():
    rho0 = projector(maximally_coherent(4))
    dec = check_recoverable(rho0, depolarize(rho0, 0.3), LADDER4)
    assert dec.recoverable and dec.full_rank


def test_complete_dephasing_not_recoverable():
    rho0 = projector(maximally_coherent(4))
    noisy = dephase(rho0, LADDER4, np.inf)
    dec = check_recoverable(rho0, noisy, LADDER4)
    assert not dec.recoverable
    assert not dec.span_included
    assert dec.source_span.generator == 0


def test_full_rank():
    assert is_full_rank(np.eye(3) / 3)
    assert not is_full_rank(np.diag([1.0, 0.0]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 0.99))
def test_depolarizing_keeps_modes(seed, p):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    rho0 = projector(v / np.linalg.norm(v))
    m0 = mode_set(rho0, LADDER4, threshold=1e-6)
    m1 = mode_set(depolarize(rho0, p), LADDER4, threshold=1e-6 * (1 - p))
    assert set(m0.gaps) <= set(m1.gaps)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_selective_dephase_removes_gap(seed, gap):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    noisy = selective_dephase(projector(v / np.linalg.norm(v)), LADDER4, gap)
    assert gap not in mode_set(noisy, LADDER4)
