import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import central_spin_dense, central_spin_dense_product, entropy_bits, partial_trace_loops
from qdarwin.branch import (
    BranchState, CentralSpinModel, branch_entropy, branch_mutual_information, central_spin_state_at,
    decoherence_factor, dense_central_spin_state, rank2_spectrum, reduced_joint_density, system_entropy,
)
from qdarwin.info import mutual_information, von_neumann_entropy
from qdarwin.qstate import DimensionCapError, dimension_cap, partial_trace


def model(n, seed, amps=(2 ** -0.5, 2 ** -0.5)):
    return CentralSpinModel.random(n, seed, amps)


@given(st.integers(1, 5), st.integers(0, 2**31), st.floats(0, 4))
def test_branch_state_matches_expm_oracle(n, seed, t):
    m = model(n, seed, (0.6, 0.8j))
    ref = central_spin_dense(m.couplings, t, 0.6, 0.8j)
    got = central_spin_state_at(m, t).to_pure_state().amplitudes
    assert np.max(np.abs(got - ref)) < 1e-12


@given(st.integers(1, 5), st.integers(0, 2**31), st.floats(0, 4))
def test_product_oracle_matches_expm_oracle(n, seed, t):
    g = model(n, seed).couplings
    a = central_spin_dense(g, t, 0.6, 0.8)
    b = central_spin_dense_product(g, t, 0.6, 0.8)
    assert np.max(np.abs(a - b)) < 1e-12


def test_dense_reference_agrees():
    m = model(4, 1)
    a = dense_central_spin_state(m, 1.3).amplitudes
    b = central_spin_state_at(m, 1.3).to_pure_state().amplitudes
    assert np.max(np.abs(a - b)) < 1e-12


def test_overlap_closed_form():
    m = model(6, 2)
    t = 0.7
    ov = central_spin_state_at(m, t).overlaps()
    assert np.allclose(ov, np.cos(2 * m.couplings * t), atol=1e-14)
    assert abs(decoherence_factor(central_spin_state_at(m, t)) - np.prod(np.cos(2 * m.couplings * t))) < 1e-14
    assert decoherence_factor(central_spin_state_at(m, t), []) == 1


@given(st.integers(2, 6), st.integers(0, 2**31), st.floats(0.01, 3), st.data())
def test_reduced_density_matches_partial_trace(n, seed, t, data):
    st_ = central_spin_state_at(model(n, seed), t)
    frag = sorted(data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n - 1, unique=True)))
    psi = st_.to_pure_state()
    full = np.outer(psi.amplitudes, psi.amplitudes.conj())
    ref = partial_trace_loops(full, [2] * (n + 1), [0] + [k + 1 for k in frag])
    assert np.max(np.abs(reduced_joint_density(st_, frag).matrix - ref)) < 1e-12
    ref_f = partial_trace_loops(full, [2] * (n + 1), [k + 1 for k in frag])
    assert np.max(np.abs(reduced_joint_density(st_, frag, include_system=False).matrix - ref_f)) < 1e-12


@given(st.floats(0, 1), st.complex_numbers(max_magnitude=1))
def test_rank2_spectrum_against_eig(pa, x):
    pb = 1 - pa
    u = np.array([1.0, 0.0])
    v = np.array([np.conj(x), math.sqrt(max(0.0, 1 - abs(x) ** 2))])
    rho = pa * np.outer(u, u) + pb * np.outer(v, v.conj())
    ref = np.sort(np.linalg.eigvalsh(rho))[::-1]
    assert np.allclose(rank2_spectrum(pa, pb, x), ref, atol=1e-7)


@given(st.integers(2, 7), st.integers(0, 2**31), st.floats(0.01, 3), st.data())
def test_entropies_and_mi_against_dense(n, seed, t, data):
    st_ = central_spin_state_at(model(n, seed, (0.6, 0.8)), t)
    frag = sorted(data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n - 1, unique=True)))
    psi = st_.to_pure_state()
    rho = psi.density()
    h_s = entropy_bits(partial_trace(rho, [0]).matrix)
    h_f = entropy_bits(partial_trace(rho, [k + 1 for k in frag]).matrix)
    h_sf = entropy_bits(partial_trace(rho, [0] + [k + 1 for k in frag]).matrix)
    assert abs(system_entropy(st_) - h_s) < 1e-9
    assert abs(branch_entropy(st_, frag) - h_f) < 1e-9
    assert abs(branch_entropy(st_, frag, include_system=True) - h_sf) < 1e-9
    i_ref = h_s + h_f - h_sf
    assert abs(branch_mutual_information(st_, [frag])[0] - i_ref) < 1e-9
    mask = np.zeros((1, n), dtype=bool)
    mask[0, frag] = True
    assert abs(branch_mutual_information(st_, mask, "nats")[0] - i_ref * math.log(2)) < 1e-9


def test_full_environment_information():
    st_ = central_spin_state_at(model(5, 0), 2.0)
    h_s = system_entropy(st_)
    assert abs(branch_mutual_information(st_, [range(5)])[0] - 2 * h_s) < 1e-12
    assert branch_mutual_information(st_, [()])[0] == pytest.approx(0, abs=1e-14)


def test_validation():
    with pytest.raises(ValueError):
        CentralSpinModel([1.0, -0.2])
    with pytest.raises(ValueError):
        CentralSpinModel([1.0], (1.0, 1.0))
    with pytest.raises(ValueError):
        BranchState((1, 0), np.ones((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        central_spin_state_at(model(2, 0), -1.0)


def test_dense_cap():
    with dimension_cap(8):
        with pytest.raises(DimensionCapError):
            reduced_joint_density(central_spin_state_at(model(4, 0), 1.0), [0, 1, 2])


def test_large_environment_is_cheap():
    st_ = central_spin_state_at(model(2000, 5), 1.0)
    vals = branch_mutual_information(st_, [range(0, 1000, 2), range(1000)])
    assert np.all(vals >= 0) and np.all(vals <= 2 * system_entropy(st_) + 1e-12)


def test_mutual_information_via_info_module():
    st_ = central_spin_state_at(model(4, 9), 0.8)
    rho = reduced_joint_density(st_, [1, 3])
    assert abs(mutual_information(rho, [0]) - branch_mutual_information(st_, [[1, 3]])[0]) < 1e-10
    assert abs(von_neumann_entropy(rho) - branch_entropy(st_, [1, 3], include_system=True)) < 1e-10
