import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqec.exceptions import InvalidArgumentError
from cqec.noise import (
    NoiseKind,
    NoiseSpec,
    amplitude_damp,
    combined,
    dephase,
    depolarize,
    epsilon_family,
    predicted_dephased_fidelity,
    selective_dephase,
)
from cqec.qstate import HamiltonianSpec, l1_coherence, maximally_coherent, projector

from conftest import random_density

seeds = st.integers(0, 2**31)


def test_amplitude_damping_single_qubit():
    out = amplitude_damp(np.diag([0.0, 1.0]), 0.1)
    np.testing.assert_allclose(out, np.diag([0.1, 0.9]), atol=1e-15)


def test_amplitude_damping_acts_per_qubit():
    # |01> in little-endian: qubit 0 excited, qubit 1 ground
    rho = np.zeros((4, 4))
    rho[1, 1] = 1.0
    out = amplitude_damp(rho, 0.25)
    np.testing.assert_allclose(np.diag(out).real, [0.25, 0.75, 0.0, 0.0], atol=1e-15)


def test_dephasing_factors():
    h = HamiltonianSpec.linear_ladder(3)
    rho = np.full((3, 3), 1 / 3)
    out = dephase(rho, h, 1.0)
    assert out[0, 2] == pytest.approx(np.exp(-2) / 3)
    assert out[1, 1] == pytest.approx(1 / 3)
    np.testing.assert_allclose(dephase(rho, h, np.inf), np.eye(3) / 3)


def test_epsilon_family_values():
    rho = epsilon_family(maximally_coherent(4), 0.01)
    assert l1_coherence(rho) == pytest.approx(0.12)
    np.testing.assert_allclose(epsilon_family(maximally_coherent(4), 0.25),
                               projector(maximally_coherent(4)), atol=1e-15)
    with pytest.raises(InvalidArgumentError):
        epsilon_family(maximally_coherent(4), 0.3)


def test_selective_dephase_repair_info():
    h = HamiltonianSpec.linear_ladder(4)
    out, info = selective_dephase(projector(maximally_coherent(4)), h, 1, return_info=True)
    assert info.repaired
    assert info.min_eigenvalue_before < 0
    assert np.linalg.eigvalsh(out)[0] >= -1e-12
    assert out[0, 1] == 0


def test_selective_dephase_absent_gap_unchanged():
    h = HamiltonianSpec.linear_ladder(4)
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    np.testing.assert_array_equal(selective_dephase(rho, h, 1), rho)


def test_predicted_dephased_fidelity():
    assert predicted_dephased_fidelity(0.25, 2.0) == pytest.approx(0.35150, abs=5e-6)
    assert predicted_dephased_fidelity(0.3, 0.0) == 1.0
    assert predicted_dephased_fidelity(0.3, 1e6) == pytest.approx(0.3)


def test_noise_spec_roundtrip():
    spec = NoiseSpec.combined(1.5, 0.2)
    assert NoiseSpec.from_dict(spec.to_dict()) == spec
    assert spec.kind is NoiseKind.COMBINED
    with pytest.raises(InvalidArgumentError):
        NoiseSpec.depolarizing(1.5)
    with pytest.raises(InvalidArgumentError):
        NoiseSpec.selective_dephasing(0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0, 5), st.floats(0, 1), st.floats(0, 1))
def test_channels_preserve_trace_and_hermiticity(seed, gamma, p, g_ad):
    rho = random_density(np.random.default_rng(seed), 4)
    h = HamiltonianSpec.qubit_sum_z(2)
    for out in (dephase(rho, h, gamma), depolarize(rho, p), amplitude_damp(rho, g_ad),
                combined(rho, h, gamma, p, g_ad)):
        assert abs(np.trace(out).real - 1.0) <= 1e-12
        np.testing.assert_array_equal(out, out.conj().T)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0, 5), st.floats(0, 1))
def test_dephase_depolarize_commute(seed, gamma, p):
    rho = random_density(np.random.default_rng(seed), 4)
    h = HamiltonianSpec.linear_ladder(4)
    a = dephase(depolarize(rho, p), h, gamma)
    b = depolarize(dephase(rho, h, gamma), p)
    assert np.max(np.abs(a - b)) <= 1e-12
