import numpy as np
import pytest

from cqec.bench_states import cfqpe_state, qkan_state
from cqec.circuit import n_layered_params
from cqec.catalyst import restart_rng
from cqec.exceptions import InvalidArgumentError
from cqec.noise import NoiseSpec
from cqec.qstate import HamiltonianSpec, maximally_coherent, projector, uhlmann_fidelity
from cqec.recovery import (
    HARD_CATALYST_MULTIPLIER,
    CircuitShape,
    CQECRecovery,
    ProtocolConfig,
    RecoveryBudget,
    RecoveryObjectiveWeights,
    _Evaluator,
    _lhs_candidates,
    asymptotic_fidelity,
    durability_loop,
    objective,
    optimize_parameters,
    run_protocol,
    threshold_grid,
)

SMALL = RecoveryBudget(n_lhs=20, n_refine=2, maxiter=40)
SHAPE = CircuitShape(2, 2, 2, 1)


@pytest.mark.parametrize("fs,fc,expected", [(1, 1, 1.0), (0, 1, 0.3), (1, 0, 0.7)])
def test_objective_examples(fs, fc, expected):
    assert objective(fs, fc) == pytest.approx(expected)


def test_weights_validation():
    with pytest.raises(InvalidArgumentError):
        RecoveryObjectiveWeights(alpha=1.5)
    with pytest.raises(InvalidArgumentError):
        CircuitShape(1, 1, 2, depth=4)


def test_zero_angles_are_identity():
    psi = qkan_state()
    noisy = NoiseSpec.depolarizing(0.2).apply(psi, HamiltonianSpec.qubit_sum_z(2))
    ev = _Evaluator(psi, noisy, projector(psi), SHAPE, RecoveryObjectiveWeights(), False)
    f_s, f_c = ev.fidelities(np.zeros((1, ev.n_params)))
    assert f_s[0] == pytest.approx(uhlmann_fidelity(projector(psi), noisy), abs=1e-12)
    assert f_c[0] == pytest.approx(1.0, abs=1e-12)


def test_noiseless_input_recovers_exactly():
    psi = maximally_coherent(4)
    rho = projector(psi)
    res = optimize_parameters(psi, rho, rho, SHAPE, SMALL, seed=1)
    assert res.f_before == pytest.approx(1.0, abs=1e-12)
    assert res.f_after >= res.f_before - 1e-12


def test_refinement_never_below_screening():
    psi = qkan_state()
    h = HamiltonianSpec.qubit_sum_z(2)
    noisy = NoiseSpec.dephasing(2.0).apply(psi, h)
    cat = projector(psi)
    weights = RecoveryObjectiveWeights()
    res = optimize_parameters(psi, noisy, cat, SHAPE, SMALL, seed=4, weights=weights)
    ev = _Evaluator(psi, noisy, cat, SHAPE, weights, False)
    pool = _lhs_candidates(ev.n_params, SMALL.n_lhs, restart_rng(4, 0))
    assert res.objective >= ev.objective(pool).max() - 1e-12
    assert res.iterations <= SMALL.n_refine * SMALL.maxiter


def test_seed_determinism():
    psi = qkan_state()
    noisy = NoiseSpec.dephasing(1.0).apply(psi, HamiltonianSpec.qubit_sum_z(2))
    a = optimize_parameters(psi, noisy, projector(psi), SHAPE, SMALL, seed=9)
    b = optimize_parameters(psi, noisy, projector(psi), SHAPE, SMALL, seed=9)
    np.testing.assert_array_equal(a.theta, b.theta)
    assert a.f_after == b.f_after


def test_argmax_invariant_under_common_rescaling(rng):
    psi = qkan_state()
    noisy = NoiseSpec.dephasing(2.0).apply(psi, HamiltonianSpec.qubit_sum_z(2))
    ev = _Evaluator(psi, noisy, projector(psi), SHAPE, RecoveryObjectiveWeights(), False)
    x = rng.uniform(0, 2 * np.pi, (200, ev.n_params))
    f_s, f_c = ev.fidelities(x)
    base = objective(f_s, f_c)
    for scale in (0.1, 3.0, 1e4):
        assert np.argmax(objective(scale * f_s, scale * f_c)) == np.argmax(base)


def test_hard_constraint_on_diagonal_input():
    psi = maximally_coherent(4)
    h = HamiltonianSpec.linear_ladder(4)
    noisy = NoiseSpec.epsilon(0.0).apply(psi, h)
    weights = RecoveryObjectiveWeights(0.7, HARD_CATALYST_MULTIPLIER)
    res = optimize_parameters(psi, noisy, projector(psi), SHAPE, SMALL, seed=0,
                              weights=weights, hard_catalyst=True, recoverable=False)
    assert res.f_catalyst >= 1 - 1e-9
    assert res.f_after <= np.max(np.abs(psi) ** 2) + 1e-3


def test_cfqpe_depolarizing_protocol():
    res = run_protocol(cfqpe_state(), NoiseSpec.depolarizing(0.3),
                       ProtocolConfig(catalyst="target",
                                      budget=RecoveryBudget(4, 1, 5)))
    assert res.recoverable
    assert res.f_before == pytest.approx(0.71875, abs=1e-10)
    assert res.f_asymptotic == 1.0


def test_complete_dephasing_unrecoverable():
    psi = qkan_state()
    res = run_protocol(psi, NoiseSpec.dephasing(np.inf),
                       ProtocolConfig(catalyst="target", budget=SMALL))
    assert not res.recoverable
    assert res.f_after <= 1.0


def test_selective_dephasing_partial_recovery():
    res = run_protocol(maximally_coherent(4), NoiseSpec.selective_dephasing(1),
                       ProtocolConfig(hamiltonian="linear_ladder", catalyst="target"))
    assert not res.recoverable
    assert 0.25 < res.f_after < 0.95


def test_asymptotic_fidelity_classes():
    psi = maximally_coherent(4)
    h = HamiltonianSpec.linear_ladder(4)
    rho = projector(psi)
    assert asymptotic_fidelity(rho, NoiseSpec.depolarizing(0.5).apply(rho, h), h) == 1.0
    assert asymptotic_fidelity(rho, np.eye(4) / 4, h) == pytest.approx(0.25)


def test_threshold_grid_shape():
    g = threshold_grid(4)
    assert g.size == 31 and g[0] == 0.0 and g[1] == 1e-10
    assert g[-1] == pytest.approx(0.25)
    assert np.all(np.diff(g) > 0)


def test_durability_identity_is_stationary():
    psi = qkan_state()
    h = HamiltonianSpec.qubit_sum_z(2)
    noisy = NoiseSpec.dephasing(1.0).apply(psi, h)
    recs = durability_loop(psi, noisy, projector(psi), np.zeros(n_layered_params(2, 2, 2)), SHAPE, cycles=7)
    assert len(recs) == 7
    assert np.ptp([r.f_rec for r in recs]) <= 1e-12
    assert max(r.catalyst_deviation for r in recs) <= 1e-12


def test_estimator_roundtrip():
    psi = qkan_state()
    noisy = NoiseSpec.depolarizing(0.3).apply(psi, HamiltonianSpec.qubit_sum_z(2))
    est = CQECRecovery(n_lhs=10, n_refine=1, maxiter=20, random_state=2)
    assert est.get_params()["alpha"] == 0.7
    est.fit(noisy, psi)
    out = est.transform(noisy)
    assert out.shape == (4, 4)
    assert est.score(noisy) == pytest.approx(est.result_.f_after, abs=1e-10)
    with pytest.raises(InvalidArgumentError):
        CQECRecovery().transform(noisy)
