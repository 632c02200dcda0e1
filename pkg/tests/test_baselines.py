import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqec.baselines import (
    BoundInputs,
    bound_constant,
    copies_for_target,
    copy_mu,
    finite_copy_infidelity,
    per_qubit_rate,
    power_law_fit,
    steane_fidelity,
    surface_logical_error,
    unprotected_fidelity,
)
from cqec.exceptions import FitError, InvalidArgumentError, UndefinedBoundError
from cqec.noise import dephase
from cqec.qstate import HamiltonianSpec, maximally_coherent, projector


def test_per_qubit_rate():
    assert per_qubit_rate(0.0, 5) == 0.0
    assert per_qubit_rate(0.3, 1) == pytest.approx(0.3)
    assert per_qubit_rate(0.1, 4) == pytest.approx(0.025996253574703254, abs=1e-15)
    assert round(per_qubit_rate(0.1, 4), 5) == 0.026


def test_steane_and_surface():
    assert steane_fidelity(0.0) == 1.0
    assert surface_logical_error(0.0, 3) == 0.0
    assert surface_logical_error(0.01, 3) == 1.0
    assert surface_logical_error(0.005, 5) < surface_logical_error(0.005, 3)
    with pytest.raises(InvalidArgumentError):
        surface_logical_error(0.001, 4)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_steane_monotone(p, q):
    lo, hi = sorted((p, q))
    assert steane_fidelity(lo) >= steane_fidelity(hi) - 1e-15


def test_unprotected():
    assert unprotected_fidelity(0.01, 16) == pytest.approx(0.990625)


def test_finite_copy_anchor():
    assert finite_copy_infidelity(8.5, 722500) == pytest.approx(0.010025, abs=1e-6)
    assert finite_copy_infidelity(0.0, 10) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 5000), st.floats(1e-4, 0.5))
def test_copies_is_minimal(C, eps):
    n = copies_for_target(C, eps)
    assert finite_copy_infidelity(C, n) <= eps
    assert n == 1 or finite_copy_infidelity(C, n - 1) > eps


def test_bound_inputs():
    assert BoundInputs(8.5, 0.01).copies() == copies_for_target(8.5, 0.01)
    with pytest.raises(InvalidArgumentError):
        BoundInputs(0.0, 0.01)


def test_bound_constant_values():
    assert bound_constant(projector(maximally_coherent(4))) == pytest.approx(48.0)
    qubit = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert bound_constant(qubit) == pytest.approx(4.0)
    with pytest.raises(UndefinedBoundError):
        bound_constant(np.eye(2) / 2)


def test_bound_constant_dephased_scaling():
    rho0 = projector(maximally_coherent(4))
    h = HamiltonianSpec.linear_ladder(4)
    gamma = 0.7
    noisy = dephase(rho0, h, gamma)
    ratio = bound_constant(rho0, h, noisy=noisy) / bound_constant(rho0, h)
    assert ratio == pytest.approx(math.exp(gamma * 3))


def test_bound_constant_phase_invariant(rng):
    psi = maximally_coherent(4) * np.exp(0.8j)
    assert bound_constant(projector(psi)) == pytest.approx(48.0)


def test_copy_mu():
    assert copy_mu(0.1) == pytest.approx(100.0)
    assert copy_mu(0.2 * math.exp(-1.0)) / copy_mu(0.2) == pytest.approx(math.exp(2.0))
    with pytest.raises(UndefinedBoundError):
        copy_mu(0.0)


def test_power_law_exact_and_degenerate():
    fit = power_law_fit([(1, 2), (2, 8), (4, 32)])
    assert fit.exponent == pytest.approx(2.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.predict(3) == pytest.approx(18.0)
    with pytest.raises(FitError):
        power_law_fit([(4, 1), (4, 2)])
    with pytest.raises(FitError):
        power_law_fit([(4, -1), (8, 2)])


def test_power_law_table_coefficient():
    fit = power_law_fit([(4, 8.5), (8, 42), (16, 170), (64, 2700)])
    assert abs(fit.coefficient - 0.53) <= 0.1
