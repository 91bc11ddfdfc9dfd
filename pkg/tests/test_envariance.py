import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import unitary_group

from oracles import binomial_exact
from qdarwin.envariance import (
    FineGrainPlan, SchmidtFrame, SchmidtLocalUnitary, born_probabilities, chain_overlap_invariant,
    fine_grain_to_even, fine_grained_environment_basis, frequency_distribution, optimal_counter_unitary,
    plan_for_state, purify, rational_approximation, repeatability_orthogonality_check, schmidt_counterswap,
    schmidt_swap, verify_envariance,
)
from qdarwin.qstate import DensityMatrix, PureState, apply_local_unitary, schmidt_decompose


def schmidt_state(coeffs, phases, seed, d_e=None):
    """sum_k c_k e^{-i phi_k} U|k> V|k> with Haar U, V."""
    d = len(coeffs)
    d_e = d_e or d
    u = unitary_group.rvs(d, random_state=seed)
    v = unitary_group.rvs(d_e, random_state=seed + 1)
    mat = sum(c * np.exp(-1j * p) * np.outer(u[:, k], v[:, k]) for k, (c, p) in enumerate(zip(coeffs, phases)))
    return PureState.from_unnormalized(mat.reshape(-1), [d, d_e])


def even_state(d, seed):
    rng = np.random.default_rng(seed)
    return schmidt_state([1 / math.sqrt(d)] * d, rng.uniform(0, 2 * math.pi, d), seed)


def test_frame_amplitudes_reconstruct():
    psi = schmidt_state([0.8, 0.6], [0.3, 1.9], 4)
    fr = SchmidtFrame.of(psi)
    mat = sum(fr.amplitudes[k] * np.outer(fr.left_basis[:, k], fr.right_basis[:, k]) for k in range(2))
    assert np.allclose(mat.reshape(-1), psi.amplitudes, atol=1e-12)
    assert np.allclose(fr.coefficients, [0.8, 0.6])
    assert np.allclose(np.exp(-1j * fr.phases) * fr.coefficients, fr.amplitudes)


@given(st.integers(2, 16), st.integers(0, 10**6), st.data())
def test_swap_counterswap_round_trip(d, seed, data):
    psi = even_state(d, seed)
    k = data.draw(st.integers(0, d - 1))
    l = data.draw(st.integers(0, d - 1))
    frame = SchmidtFrame.of(psi)
    eta = schmidt_swap(psi, (0,), k, l, frame=frame)
    back = schmidt_counterswap(eta, (0,), k, l, frame=frame)
    assert back.fidelity(psi) >= 1 - 1e-10


def test_swap_changes_uneven_state():
    psi = schmidt_state([math.sqrt(2 / 3), math.sqrt(1 / 3)], [0.0, 0.0], 3)
    v = verify_envariance(psi, SchmidtLocalUnitary.swap(0, 1))
    assert not v.envariant
    assert v.fidelity < 1 - 1e-3
    assert v.witness is None


def test_even_swap_envariant():
    psi = even_state(4, 2)
    v = verify_envariance(psi, SchmidtLocalUnitary.swap(1, 3))
    assert v.envariant and v.witness_kind == "textbook"


@given(st.integers(2, 6), st.integers(0, 10**6))
def test_phase_rotation_always_envariant(d, seed):
    rng = np.random.default_rng(seed)
    w = rng.random(d) + 0.05
    psi = schmidt_state(np.sqrt(w / w.sum()), rng.uniform(0, 6, d), seed)
    v = verify_envariance(psi, SchmidtLocalUnitary.phase(rng.uniform(0, 6, d)))
    assert v.envariant and v.fidelity > 1 - 1e-10


def test_polar_fallback_for_generic_unitary():
    psi = even_state(3, 5)
    u = unitary_group.rvs(3, random_state=1)
    v = verify_envariance(psi, u)
    # any local unitary on a maximally entangled state can be undone
    assert v.envariant and v.witness_kind == "polar"
    eta = apply_local_unitary(psi, u, (0,))
    restored = apply_local_unitary(eta, v.witness, (1,))
    assert restored.fidelity(psi) > 1 - 1e-10


def test_polar_fidelity_is_optimal():
    psi = schmidt_state([0.9, math.sqrt(0.19)], [0, 0], 8)
    u = unitary_group.rvs(2, random_state=3)
    eta = apply_local_unitary(psi, u, (0,))
    w, fid = optimal_counter_unitary(psi, eta, (0,))
    assert abs(apply_local_unitary(eta, w, (1,)).fidelity(psi) - fid) < 1e-10
    for s in range(20):
        other = unitary_group.rvs(2, random_state=100 + s)
        assert apply_local_unitary(eta, other, (1,)).fidelity(psi) <= fid + 1e-10


def test_non_unitary_rejected(bell):
    with pytest.raises(ValueError):
        verify_envariance(bell, np.ones((2, 2)))


def test_two_thirds_born(two_thirds):
    res = born_probabilities(two_thirds)
    assert res.probabilities == (Fraction(2, 3), Fraction(1, 3))
    assert res.counted_from_state and not res.continuity
    assert res.M == 3


def test_fine_grained_two_thirds_structure(two_thirds):
    plan = FineGrainPlan((2, 1))
    even = fine_grain_to_even(two_thirds, plan)
    assert even.layout.dims == (3, 3, 3)
    dec = schmidt_decompose(even, (0, 1))
    assert np.allclose(dec.coefficients[:3], 1 / math.sqrt(3), atol=1e-12)
    assert np.allclose(dec.coefficients[3:], 0, atol=1e-12)
    t = even.tensor()
    # weight on S = |0> is 2/3 spread over two counter states, S = |2> carries 1/3 on one
    w_s = np.einsum("sce,sce->s", t, t.conj()).real
    assert np.allclose(w_s, [2 / 3, 0, 1 / 3], atol=1e-12)
    w_sc = np.einsum("sce,sce->sc", t, t.conj()).real
    assert np.allclose(w_sc[0], [1 / 3, 1 / 3, 0], atol=1e-12)
    assert np.allclose(w_sc[2], [0, 0, 1 / 3], atol=1e-12)


def test_fine_grained_basis_is_unitary_and_sums():
    psi = schmidt_state([math.sqrt(0.5), math.sqrt(0.25), math.sqrt(0.25)], [0.1, 0.2, 0.3], 6, d_e=5)
    fr = SchmidtFrame.of(psi)
    plan = FineGrainPlan((2, 1, 1))
    e = fine_grained_environment_basis(fr, plan)
    assert np.allclose(e.conj().T @ e, np.eye(5), atol=1e-12)
    assert np.allclose(e[:, 0:2].sum(axis=1), math.sqrt(2) * fr.right_basis[:, 0], atol=1e-12)


def test_fine_grain_rejects_mismatched_plan(two_thirds):
    with pytest.raises(ValueError):
        fine_grain_to_even(two_thirds, FineGrainPlan((1, 1)))


@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 10**6))
def test_random_rational_born(m0, m1, seed):
    M = m0 + m1
    psi = schmidt_state([math.sqrt(m0 / M), math.sqrt(m1 / M)], [0.4, 2.0], seed, d_e=4)
    res = born_probabilities(psi)
    w = sorted([m0 / M, m1 / M], reverse=True)
    assert all(abs(float(p) - x) < 1e-12 for p, x in zip(res.probabilities, w))
    assert sum(res.probabilities) == 1


def test_irrational_uses_continuity_or_rational_approx():
    psi = schmidt_state([math.sqrt(1 / math.pi), math.sqrt(1 - 1 / math.pi)], [0, 0], 2)
    res = born_probabilities(psi)
    assert res.approximation_error < 1e-6
    assert sum(res.probabilities) == 1


def test_plan_continuity_fallback():
    psi = schmidt_state([math.sqrt(1 / math.pi), math.sqrt(1 - 1 / math.pi)], [0, 0], 2)
    plan, cont = plan_for_state(psi, tol=1e-15, max_denominator=2**10)
    assert cont and plan.M == 2**10


def test_rational_approximation():
    assert rational_approximation(0.7, 1e-12, 2**20) == Fraction(7, 10)
    assert rational_approximation(1 / 3, 1e-12, 2**20) == Fraction(1, 3)
    assert rational_approximation(math.pi - 3, 1e-15, 100) is None


def test_frequency_rational_mean():
    for p, n in [(Fraction(1, 3), 30), (Fraction(2, 7), 49), (Fraction(1, 2), 11)]:
        fd = frequency_distribution(p, n)
        assert fd.rational
        assert fd.mean == p * n
        assert list(fd.pmf) == binomial_exact(p, n)


def test_frequency_float_mode():
    fd = frequency_distribution(0.3, 40)
    ref = [float(x) for x in binomial_exact(Fraction(3, 10), 40)]
    assert np.allclose(fd.pmf, ref, atol=1e-14)
    assert abs(fd.mean - 12) < 1e-12
    with pytest.raises(ValueError):
        frequency_distribution(1.2, 5)


def test_frequency_gaussian_error():
    fd = frequency_distribution(Fraction(1, 2), 1000)
    assert fd.max_gaussian_error < 1e-4


def random_unit(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def test_record_check_pure():
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = random_unit(rng, 2)
        t = random_unit(rng, 2)
        e, f = random_unit(rng, 3), random_unit(rng, 3)
        r = repeatability_orthogonality_check(s, t, e, f)
        assert not r.consistent and r.violation > 0
        perp = np.array([-np.conj(s[1]), np.conj(s[0])])
        assert repeatability_orthogonality_check(s, perp, e, f).consistent
        assert repeatability_orthogonality_check(s, t, e, e).consistent


def test_record_check_mixed():
    rng = np.random.default_rng(1)
    for _ in range(50):
        s, t = random_unit(rng, 2), random_unit(rng, 2)
        psi_a, psi_b = random_unit(rng, 4), random_unit(rng, 4)
        ra = DensityMatrix(np.einsum("ij,kj->ik", psi_a.reshape(2, 2), psi_a.reshape(2, 2).conj()), [2])
        rb = DensityMatrix(np.einsum("ij,kj->ik", psi_b.reshape(2, 2), psi_b.reshape(2, 2).conj()), [2])
        assert repeatability_orthogonality_check(s, t, ra, rb).violation > 0
        assert repeatability_orthogonality_check(s, t, ra, ra).consistent


def test_purify_round_trip():
    rng = np.random.default_rng(2)
    psi = random_unit(rng, 6)
    rho = DensityMatrix(np.einsum("ij,kj->ik", psi.reshape(3, 2), psi.reshape(3, 2).conj()), [3])
    pure = purify(rho)
    red = np.einsum("ij,kj->ik", pure.tensor(), pure.tensor().conj())
    assert np.allclose(red, rho.matrix, atol=1e-12)


def test_chain_invariant_physical():
    rng = np.random.default_rng(3)
    s, t = random_unit(rng, 2), random_unit(rng, 2)
    links = [np.vdot(random_unit(rng, 2), random_unit(rng, 2)) for _ in range(4)]
    residual = 0.5 + 0.2j
    initial = residual * np.prod(links)
    assert chain_overlap_invariant(initial, links, residual).consistent
    assert chain_overlap_invariant(initial, links).consistent
    assert not chain_overlap_invariant(initial, links, residual * 1.1).consistent
    del s, t


def test_chain_invariant_impossible():
    c = chain_overlap_invariant(0.9, [0.5, 0.5])
    assert not c.consistent
    assert abs(c.implied_residual - 3.6) < 1e-12
    assert abs(c.log_terms[0] - 2 * math.log(0.5)) < 1e-15
    assert chain_overlap_invariant(0.0, [0.5]).consistent
    with pytest.raises(ValueError):
        chain_overlap_invariant(1.5, [0.5])


def test_fast_shift_matches_dense_unitary():
    from qdarwin.envariance import fine_graining_unitary
    psi = schmidt_state([math.sqrt(0.5), math.sqrt(0.25), math.sqrt(0.25)], [0.7, 0.1, 2.2], 9, d_e=5)
    plan = FineGrainPlan((2, 1, 1))
    fr = SchmidtFrame.of(psi)
    basis = fine_grained_environment_basis(fr, plan)
    u = fine_graining_unitary(basis, 4, 4)
    assert np.allclose(u.conj().T @ u, np.eye(20), atol=1e-12)
    start = np.einsum("se,c->sce", psi.tensor(), np.eye(4)[0])
    dense = apply_local_unitary(PureState(start.reshape(-1), [3, 4, 5]), u, (2, 1))
    fast = fine_grain_to_even(psi, plan)
    assert np.allclose(dense.amplitudes, fast.amplitudes, atol=1e-12)
