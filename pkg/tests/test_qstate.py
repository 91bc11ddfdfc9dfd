import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import haar_purity_mean, partial_trace_loops
from qdarwin.qstate import (
    DensityMatrix, DimensionCapError, PureState, SubsystemLayout, apply_local_unitary, dimension_cap,
    get_dimension_cap, haar_random_state, marginal_spectrum, partial_trace, reduced_density, schmidt_decompose,
    tensor_product,
)

dims_strategy = st.lists(st.integers(2, 3), min_size=2, max_size=4)


def random_state(dims, seed):
    return haar_random_state(SubsystemLayout(dims), seed)


def test_layout_basics():
    lay = SubsystemLayout([2, 3, 4], ["S", "A", "B"])
    assert lay.total_dim == 24
    assert lay.sub([2, 0]).dims == (4, 2)
    assert lay.dim_of([1, 2]) == 12
    assert lay.concat(SubsystemLayout([5])).dims == (2, 3, 4, 5)
    with pytest.raises(IndexError):
        lay.check_indices([3])
    with pytest.raises(ValueError):
        SubsystemLayout([2, 1])


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]), [2])
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 0.0, 0.0]), [2])
    psi = PureState.from_unnormalized([1, 1j], [2])
    assert abs(np.vdot(psi.amplitudes, psi.amplitudes) - 1) < 1e-14


def test_density_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.0, 0.2], [0.0, 0.0]]), [2])
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]), [2])
    rho = DensityMatrix.maximally_mixed([2, 2])
    assert abs(rho.purity() - 0.25) < 1e-14


def test_basis_and_tensor_product():
    a = PureState.basis([2], 1)
    b = PureState.basis([3], 2)
    ab = tensor_product(a, b)
    assert ab.layout.dims == (2, 3)
    assert ab.amplitudes[5] == 1
    assert PureState.basis([2, 3], (1, 2)).fidelity(ab) == 1.0


@given(dims_strategy, st.integers(0, 2**31), st.data())
def test_partial_trace_matches_loops(dims, seed, data):
    psi = random_state(dims, seed)
    keep = data.draw(st.lists(st.integers(0, len(dims) - 1), min_size=1, max_size=len(dims) - 1, unique=True))
    ref = partial_trace_loops(np.outer(psi.amplitudes, psi.amplitudes.conj()), dims, keep)
    got = partial_trace(psi.density(), sorted(keep)).matrix
    assert np.allclose(got, ref, atol=1e-12)


def test_partial_trace_rejects_trivial_keep(bell):
    with pytest.raises(ValueError):
        partial_trace(bell.density(), [0, 1])
    with pytest.raises(ValueError):
        partial_trace(bell.density(), [])


@given(dims_strategy, st.integers(0, 2**31), st.data())
def test_pure_reduced_matches_density_path(dims, seed, data):
    psi = random_state(dims, seed)
    keep = sorted(data.draw(st.lists(st.integers(0, len(dims) - 1), min_size=1, max_size=len(dims) - 1,
                                     unique=True)))
    a = reduced_density(psi, keep).matrix
    b = partial_trace(psi.density(), keep).matrix
    assert np.allclose(a, b, atol=1e-12)
    spec = np.sort(marginal_spectrum(psi, keep))[::-1]
    ref = np.sort(np.linalg.eigvalsh(b))[::-1]
    assert np.allclose(spec[: ref.size], ref[: spec.size], atol=1e-12)


@given(dims_strategy, st.integers(0, 2**31))
def test_schmidt_reconstructs(dims, seed):
    psi = random_state(dims, seed)
    dec = schmidt_decompose(psi, [0])
    assert abs(np.sum(dec.coefficients**2) - 1) < 1e-12
    assert np.all(np.diff(dec.coefficients) <= 1e-14)
    back = dec.reconstruct(psi.layout)
    assert back.fidelity(psi) > 1 - 1e-12


def test_schmidt_non_contiguous_cut():
    psi = random_state([2, 3, 2], 7)
    dec = schmidt_decompose(psi, [0, 2])
    assert dec.reconstruct(psi.layout).fidelity(psi) > 1 - 1e-12
    spec = np.sort(dec.coefficients**2)
    ref = np.sort(np.linalg.eigvalsh(reduced_density(psi, [1]).matrix))
    assert np.allclose(spec, ref, atol=1e-12)


def test_apply_local_unitary_matches_einsum():
    psi = random_state([2, 3, 2], 3)
    rng = np.random.default_rng(0)
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u, _ = np.linalg.qr(z)
    out = apply_local_unitary(psi, u, [2, 0])
    # operator index order is (subsystem 2, subsystem 0)
    ref = np.einsum("abcd,dmc->bma", u.reshape(2, 2, 2, 2), psi.tensor())
    assert np.allclose(out.tensor(), ref, atol=1e-12)
    with pytest.raises(ValueError):
        apply_local_unitary(psi, np.ones((4, 4)), [2, 0])


def test_haar_purity_average():
    vals = [reduced_density(haar_random_state(SubsystemLayout([2, 8]), s), [0]).purity() for s in range(400)]
    assert abs(np.mean(vals) - haar_purity_mean(2, 8)) < 0.02


def test_haar_seed_reproducible():
    a = haar_random_state(SubsystemLayout([2, 2]), 11)
    b = haar_random_state(SubsystemLayout([2, 2]), 11)
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_dimension_cap():
    before = get_dimension_cap()
    with dimension_cap(16):
        with pytest.raises(DimensionCapError):
            haar_random_state(SubsystemLayout([2] * 5), 0)
    assert get_dimension_cap() == before


def test_bell_entanglement(bell):
    spec = marginal_spectrum(bell, [0])
    assert np.allclose(np.sort(spec), [0.5, 0.5])
    assert math.isclose(reduced_density(bell, [1]).purity(), 0.5)
