import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import record_state
from oracles import discord_bruteforce, entropy_bits, partial_trace_loops, shannon_bits
from qdarwin.info import (
    EntropyUnit, MeasurementBasis, UnsupportedConfigurationError, classical_mutual_information,
    conditional_entropy_given_measurement, joint_outcome_distribution, min_discord, mutual_information,
    observable_mutual_information, optimal_discord_measurement, outcome_probabilities, pure_state_entropy,
    quantum_discord, shannon_entropy, shannon_entropy_of_measurement, von_neumann_entropy,
)
from qdarwin.qstate import DensityMatrix, SubsystemLayout, haar_random_state, partial_trace


def random_mixed(dims, seed, anc=2):
    psi = haar_random_state(SubsystemLayout(list(dims) + [anc]), seed)
    return partial_trace(psi.density(), range(len(dims)))


def test_units():
    assert EntropyUnit.coerce("nats") is EntropyUnit.NATS
    assert EntropyUnit.coerce(EntropyUnit.BITS) is EntropyUnit.BITS
    with pytest.raises(ValueError):
        EntropyUnit.coerce("hartleys")
    assert math.isclose(shannon_entropy([0.5, 0.5], "nats"), math.log(2))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=8).filter(lambda x: sum(x) > 1e-3))
def test_shannon_matches_oracle(w):
    p = np.array(w) / sum(w)
    assert abs(shannon_entropy(p) - shannon_bits(p)) < 1e-9


@given(st.integers(0, 2**31))
def test_von_neumann_matches_oracle(seed):
    rho = random_mixed([2, 3], seed)
    assert abs(von_neumann_entropy(rho) - entropy_bits(rho.matrix)) < 1e-10


def test_bell_values(bell):
    rho = bell.density()
    assert abs(pure_state_entropy(bell, [0]) - 1) < 1e-12
    assert abs(mutual_information(rho, [0]) - 2) < 1e-12
    assert abs(mutual_information(rho, ([0], [1]), "nats") - 2 * math.log(2)) < 1e-12
    z = MeasurementBasis.computational(2, 0)
    assert np.allclose(outcome_probabilities(rho, z), [0.5, 0.5])
    assert abs(shannon_entropy_of_measurement(rho, z) - 1) < 1e-12


@given(st.integers(0, 2**31))
def test_mutual_information_subadditivity(seed):
    rho = random_mixed([2, 2, 2], seed)
    i = mutual_information(rho, ([0], [1, 2]))
    ref = (entropy_bits(partial_trace_loops(rho.matrix, [2, 2, 2], [0]))
           + entropy_bits(partial_trace_loops(rho.matrix, [2, 2, 2], [1, 2])) - entropy_bits(rho.matrix))
    assert i >= -1e-12
    assert abs(i - ref) < 1e-10


def test_measurement_basis_validation():
    with pytest.raises(ValueError):
        MeasurementBasis(np.ones((2, 2)), 0)
    with pytest.raises(ValueError):
        MeasurementBasis(np.eye(2)[:, :1], 0)
    b = MeasurementBasis.from_bloch(0.3, 1.1, 0)
    assert np.allclose(b.projectors().sum(axis=0), np.eye(2))


@given(st.integers(0, 2**31), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_conditional_entropy_direct(seed, theta, phi):
    rho = random_mixed([2, 2], seed)
    basis = MeasurementBasis.from_bloch(theta, phi, 1)
    ref = 0.0
    for k in range(2):
        v = basis.vectors[:, k]
        op = np.kron(np.eye(2), np.outer(v, v.conj()))
        post = op @ rho.matrix @ op
        p = np.trace(post).real
        if p > 1e-12:
            ref += p * entropy_bits(partial_trace_loops(post / p, [2, 2], [0]))
    assert abs(conditional_entropy_given_measurement(rho, basis) - ref) < 1e-10


@given(st.integers(0, 2**31), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_discord_nonnegative_and_bounds(seed, theta, phi):
    rho = random_mixed([2, 2], seed)
    basis = MeasurementBasis.from_bloch(theta, phi, 1)
    d = quantum_discord(rho, basis)
    assert d >= -1e-10
    assert d <= mutual_information(rho, [0]) + 1e-10


def test_joint_and_observable_information(bell):
    rho = bell.density()
    z0, z1 = MeasurementBasis.computational(2, 0), MeasurementBasis.computational(2, 1)
    joint = joint_outcome_distribution(rho, z0, z1)
    assert np.allclose(joint, [[0.5, 0], [0, 0.5]])
    assert abs(observable_mutual_information(rho, z0, z1) - 1) < 1e-12
    assert abs(classical_mutual_information(np.full((2, 2), 0.25))) < 1e-12
    with pytest.raises(ValueError):
        joint_outcome_distribution(rho, z0, z0)


def test_bell_min_discord(bell):
    assert abs(min_discord(bell.density(), 0) - 1) < 1e-3
    assert abs(min_discord(bell.density(), 1) - 1) < 1e-3


def test_record_state_discord():
    rho = record_state()
    assert abs(min_discord(rho, 1)) < 1e-6
    assert abs(quantum_discord(rho, MeasurementBasis.computational(2, 1))) < 1e-12
    d_s = min_discord(rho, 0)
    assert d_s > 0.05
    assert abs(d_s - discord_bruteforce(rho.matrix, measured=0)) < 2e-3


@pytest.mark.parametrize("seed", range(5))
def test_min_discord_against_bruteforce(seed):
    rho = random_mixed([2, 2], seed)
    got, basis = optimal_discord_measurement(rho, 1)
    ref = discord_bruteforce(rho.matrix, measured=1, n_theta=61, n_phi=61)
    # the coarse brute-force grid is an upper bound on the true minimum
    assert got <= ref + 1e-9
    assert ref - got < 5e-3
    assert abs(quantum_discord(rho, basis) - got) < 1e-9


def test_min_discord_with_rest_group():
    rho = random_mixed([2, 2, 2], 3)
    d = min_discord(rho, 0, rest=(1, 2))
    assert 0 <= d <= mutual_information(rho, ([0], [1, 2]))


def test_min_discord_rejects_qutrit():
    rho = DensityMatrix.maximally_mixed(SubsystemLayout([3, 2]))
    with pytest.raises(UnsupportedConfigurationError):
        min_discord(rho, 0)
