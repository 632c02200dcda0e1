import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqec.catalyst import (
    CatalystBudget,
    CatalystWeights,
    VariationalCatalyst,
    ansatz_state,
    ansatz_vector,
    catalyst_cost,
    mode_coverage,
    n_ansatz_params,
    optimize_catalyst,
    restart_rng,
)
from cqec.exceptions import InvalidArgumentError, UnsupportedDimensionError
from cqec.modes import ModeSet, mode_set
from cqec.qstate import HamiltonianSpec, maximally_coherent, projector


def test_param_counts():
    assert n_ansatz_params(4, 3) == 36
    assert n_ansatz_params(8, 3) == 168


def test_zero_params_give_ground_state():
    v = ansatz_vector(4, 2, np.zeros(n_ansatz_params(4, 2)))
    np.testing.assert_allclose(v, [1, 0, 0, 0])
    with pytest.raises(InvalidArgumentError):
        ansatz_vector(4, 2, np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([2, 3, 4, 8]), st.integers(1, 3))
def test_ansatz_normalized(seed, d, layers):
    x = np.random.default_rng(seed).uniform(0, 2 * np.pi, n_ansatz_params(d, layers))
    assert np.linalg.norm(ansatz_vector(d, layers, x)) == pytest.approx(1.0, abs=1e-12)


def test_single_rotation_convention():
    # one pair (0, 1): theta = pi/2 moves |0> to e^{-i phi} |1>
    v = ansatz_vector(2, 1, [np.pi / 2, 0.3])
    np.testing.assert_allclose(v, [0, np.exp(-0.3j)], atol=1e-15)


def test_cost_of_maximally_coherent():
    h = HamiltonianSpec.linear_ladder(4)
    rho = projector(maximally_coherent(4))
    modes = mode_set(rho, h)
    assert catalyst_cost(rho, modes) == pytest.approx(-1.0 - 5 * np.log(0.25))
    assert mode_coverage(rho, modes, h) == 1.0


def test_cost_zero_population_finite():
    modes = ModeSet((-1, 1))
    cost = catalyst_cost(np.diag([1.0, 0.0]), modes)
    assert np.isfinite(cost)
    assert cost == pytest.approx(10.0 - 5 * np.log(1e-300))


def test_restart_streams_differ():
    a = restart_rng(7, 0).uniform(size=3)
    b = restart_rng(7, 1).uniform(size=3)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, restart_rng(7, 0).uniform(size=3))


def test_dimension_limit():
    with pytest.raises(UnsupportedDimensionError):
        optimize_catalyst(32, ModeSet(()))


def test_small_optimization_history_monotone():
    h = HamiltonianSpec.linear_ladder(4)
    modes = mode_set(projector(maximally_coherent(4)), h)
    rep = optimize_catalyst(4, modes, CatalystBudget(layers=2, restarts=2, maxiter=80), seed=3)
    assert rep.l1 >= 2.9
    assert rep.mode_coverage == 1.0
    assert all(b <= a + 1e-9 for a, b in zip(rep.history, rep.history[1:]))
    np.testing.assert_allclose(rep.state, ansatz_state(4, 2, rep.params), atol=1e-14)


def test_estimator_api():
    est = VariationalCatalyst(layers=2, restarts=1, maxiter=60, random_state=1)
    assert est.get_params()["layers"] == 2
    cat = est.fit_transform(maximally_coherent(4))
    assert cat.shape == (4, 4)
    assert est.report_.mode_coverage == 1.0
    with pytest.raises(InvalidArgumentError):
        VariationalCatalyst().transform(maximally_coherent(4))


def test_weights_default():
    assert CatalystWeights() == CatalystWeights(1.0, 10.0, 5.0)
