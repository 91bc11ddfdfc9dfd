"""Two-branch product form for a qubit coupled to many environment qubits.

The global state is ``a|0>(x)_k|e_k^0> + b|1>(x)_k|e_k^1>``. Every marginal
has rank at most two, so entropies follow from a single overlap product and
N of 50+ spins costs O(N) per fragment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.linalg import expm

from . import kernels
from .info import EntropyUnit, entropy_of_spectrum
from .qstate import (
    DensityMatrix, DimensionCapError, PureState, SubsystemLayout, VALIDATION_TOL,
    get_dimension_cap,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _fragment_indices(fragment, n_env: int) -> tuple[int, ...]:
    idx = getattr(fragment, "indices", fragment)
    idx = tuple(sorted(int(i) for i in idx))
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated spin index in fragment {idx}")
    if idx and (idx[0] < 0 or idx[-1] >= n_env):
        raise IndexError(f"fragment {idx} out of range for {n_env} environment spins")
    return idx


@dataclass(frozen=True, eq=False)
class BranchState:
    branch_amplitudes: tuple[complex, complex]
    states0: np.ndarray  # (n_env, 2) conditional states on branch 0
    states1: np.ndarray  # (n_env, 2) conditional states on branch 1

    def __post_init__(self):
        a, b = (complex(x) for x in self.branch_amplitudes)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > VALIDATION_TOL:
            raise ValueError("branch amplitudes are not normalized")
        s0 = np.array(self.states0, dtype=np.complex128).reshape(-1, 2)
        s1 = np.array(self.states1, dtype=np.complex128).reshape(-1, 2)
        if s0.shape != s1.shape:
            raise ValueError("both branches need one conditional state per spin")
        for s in (s0, s1):
            norms = np.sum(np.abs(s) ** 2, axis=1)
            if norms.size and np.max(np.abs(norms - 1)) > VALIDATION_TOL:
                raise ValueError("conditional environment states must be normalized")
            s.setflags(write=False)
        object.__setattr__(self, "branch_amplitudes", (a, b))
        object.__setattr__(self, "states0", s0)
        object.__setattr__(self, "states1", s1)

    @property
    def n_env(self) -> int:
        return self.states0.shape[0]

    @property
    def weights(self) -> tuple[float, float]:
        a, b = self.branch_amplitudes
        return abs(a) ** 2, abs(b) ** 2

    def overlaps(self) -> np.ndarray:
        """Per-spin ``<e_k^1|e_k^0>``."""
        return np.einsum("ki,ki->k", self.states1.conj(), self.states0)

    def branch_vectors(self, fragment=(), include_system: bool = True):
        """The two (unnormalised-by-amplitude) branch vectors on S u F."""
        idx = _fragment_indices(fragment, self.n_env)
        v0 = np.array([1.0 + 0j, 0.0]) if include_system else np.ones(1, dtype=np.complex128)
        v1 = np.array([0.0 + 0j, 1.0]) if include_system else np.ones(1, dtype=np.complex128)
        for k in idx:
            v0 = np.kron(v0, self.states0[k])
            v1 = np.kron(v1, self.states1[k])
        return v0, v1

    def to_pure_state(self) -> PureState:
        """Dense amplitudes over S (x) E_1 (x) ... (x) E_N."""
        layout = SubsystemLayout([2] * (self.n_env + 1))
        v0, v1 = self.branch_vectors(range(self.n_env))
        a, b = self.branch_amplitudes
        return PureState(a * v0 + b * v1, layout)


@dataclass(frozen=True, eq=False)
class CentralSpinModel:
    """``H = sum_k g_k sigma_z^S (x) sigma_y^{E_k}``."""

    couplings: np.ndarray
    system_amplitudes: tuple[complex, complex] = (2 ** -0.5, 2 ** -0.5)
    env_initial: np.ndarray | None = None

    def __post_init__(self):
        g = np.array(self.couplings, dtype=float).reshape(-1)
        if np.any(g <= 0):
            raise ValueError("couplings must be positive")
        g.setflags(write=False)
        object.__setattr__(self, "couplings", g)
        a, b = (complex(x) for x in self.system_amplitudes)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > VALIDATION_TOL:
            raise ValueError("system amplitudes are not normalized")
        object.__setattr__(self, "system_amplitudes", (a, b))
        if self.env_initial is None:
            env = np.zeros((g.size, 2), dtype=np.complex128)
            env[:, 0] = 1.0
        else:
            env = np.array(self.env_initial, dtype=np.complex128).reshape(g.size, 2)
            if np.max(np.abs(np.sum(np.abs(env) ** 2, axis=1) - 1)) > VALIDATION_TOL:
                raise ValueError("initial environment states must be normalized")
        env.setflags(write=False)
        object.__setattr__(self, "env_initial", env)

    @classmethod
    def random(cls, n_env: int, rng, system_amplitudes=(2 ** -0.5, 2 ** -0.5)) -> "CentralSpinModel":
        """Couplings uniform on (0, 1]."""
        rng = np.random.default_rng(rng)
        return cls(1.0 - rng.random(n_env), system_amplitudes)

    @property
    def n_env(self) -> int:
        return self.couplings.size

    def average_action(self, t: float) -> float:
        return float(np.mean(self.couplings) * t)

    def time_for_action(self, action: float) -> float:
        return float(action / np.mean(self.couplings))

    def dense_hamiltonian(self) -> np.ndarray:
        n = self.n_env
        if 2 ** (n + 1) > min(get_dimension_cap(), 2**12):
            raise DimensionCapError("dense Hamiltonian limited to small environments")
        dim = 2 ** (n + 1)
        h = np.zeros((dim, dim), dtype=np.complex128)
        for k, g in enumerate(self.couplings):
            ops = [SIGMA_Z] + [np.eye(2)] * n
            ops[k + 1] = SIGMA_Y
            term = ops[0]
            for o in ops[1:]:
                term = np.kron(term, o)
            h += g * term
        return h


def _ry(angle: np.ndarray) -> np.ndarray:
    """exp(-i angle sigma_y) for each angle, shape (n, 2, 2)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2)


def central_spin_state_at(model: CentralSpinModel, t: float) -> BranchState:
    if t < 0:
        raise ValueError("t must be nonnegative")
    angle = model.couplings * t
    s0 = np.einsum("kij,kj->ki", _ry(angle), model.env_initial)
    s1 = np.einsum("kij,kj->ki", _ry(-angle), model.env_initial)
    return BranchState(model.system_amplitudes, s0, s1)


def dense_central_spin_state(model: CentralSpinModel, t: float) -> PureState:
    """Reference evolution by a dense matrix exponential (small N only)."""
    a, b = model.system_amplitudes
    psi0 = np.array([a, b])
    for k in range(model.n_env):
        psi0 = np.kron(psi0, model.env_initial[k])
    psi = expm(-1j * t * model.dense_hamiltonian()) @ psi0
    return PureState(psi, SubsystemLayout([2] * (model.n_env + 1)))


def decoherence_factor(state: BranchState, excluded=None) -> complex:
    """Product of ``<e_k^1|e_k^0>`` over ``excluded`` (all spins if None)."""
    ov = state.overlaps()
    if excluded is None:
        return complex(np.prod(ov))
    idx = _fragment_indices(excluded, state.n_env)
    return complex(np.prod(ov[list(idx)])) if idx else 1.0 + 0j


def reduced_joint_density(state: BranchState, fragment, include_system: bool = True) -> DensityMatrix:
    """rho on S u F (or F alone), built from the two restricted branch vectors."""
    idx = _fragment_indices(fragment, state.n_env)
    if not idx and not include_system:
        raise ValueError("empty fragment without the system has no state")
    dim = 2 ** (len(idx) + int(include_system))
    if dim > get_dimension_cap():
        raise DimensionCapError(f"dense marginal of dimension {dim} exceeds cap {get_dimension_cap()}")
    v0, v1 = state.branch_vectors(idx, include_system)
    a, b = state.branch_amplitudes
    outside = [k for k in range(state.n_env) if k not in set(idx)]
    gamma = decoherence_factor(state, outside)
    if not include_system:
        gamma = 0.0  # tracing S removes the cross term
    cross = a * np.conj(b) * gamma * np.outer(v0, v1.conj())
    m = abs(a) ** 2 * np.outer(v0, v0.conj()) + abs(b) ** 2 * np.outer(v1, v1.conj()) + cross + cross.conj().T
    return DensityMatrix(m, SubsystemLayout([2] * (len(idx) + int(include_system))))


def rank2_spectrum(pa: float, pb: float, coherence: complex) -> np.ndarray:
    """Eigenvalues of ``pa|u><u| + pb|v><v|`` style rank-2 marginals.

    ``coherence`` is the overlap entering the off-diagonal term; the nonzero
    eigenvalues are ``(1 +- sqrt(1 - 4 pa pb (1 - |x|^2))) / 2``.
    """
    disc = np.sqrt(np.clip(1.0 - 4.0 * pa * pb * (1.0 - abs(coherence) ** 2), 0.0, 1.0))
    return np.array([(1 + disc) / 2, (1 - disc) / 2])


def _mask(state: BranchState, fragment) -> np.ndarray:
    m = np.zeros(state.n_env, dtype=bool)
    m[list(_fragment_indices(fragment, state.n_env))] = True
    return m


def branch_entropy(state: BranchState, fragment, include_system: bool = False,
                   unit=EntropyUnit.BITS) -> float:
    """Entropy of F (or S u F) from the closed-form rank-2 spectrum."""
    mask = _mask(state, fragment)
    ov = state.overlaps()
    if include_system:
        if mask.all():
            return 0.0
        x = np.prod(ov[~mask])
    else:
        if not mask.any():
            return 0.0
        x = np.prod(ov[mask])
    return entropy_of_spectrum(rank2_spectrum(*state.weights, x), unit)


def system_entropy(state: BranchState, unit=EntropyUnit.BITS) -> float:
    return entropy_of_spectrum(rank2_spectrum(*state.weights, np.prod(state.overlaps())), unit)


def branch_mutual_information(state: BranchState, fragments, unit=EntropyUnit.BITS) -> np.ndarray:
    """I(S:F) for a batch of fragments (list of index sets or a bool mask array)."""
    if isinstance(fragments, np.ndarray) and fragments.dtype == bool:
        masks = fragments.reshape(-1, state.n_env)
    else:
        masks = np.array([_mask(state, f) for f in fragments], dtype=bool).reshape(-1, state.n_env)
    nats = kernels.branch_mutual_information(state.overlaps(), masks.astype(np.uint8), *state.weights)
    return EntropyUnit.coerce(unit).from_nats(np.asarray(nats))
