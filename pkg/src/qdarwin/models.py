"""Concrete record-making models: the c-not chain and the sigma(mu) observables."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .branch import SIGMA_X, SIGMA_Z, BranchState
from .info import MeasurementBasis
from .qstate import PureState, SubsystemLayout, VALIDATION_TOL, apply_local_unitary

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class CnotChainModel:
    """System qubit acting as control for successive target qubits."""

    a: complex = 2 ** -0.5
    b: complex = 2 ** -0.5
    n_env: int = 8
    gates_applied: int = 0

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1) > VALIDATION_TOL:
            raise ValueError("system amplitudes are not normalized")
        if self.n_env < 1:
            raise ValueError("need at least one environment qubit")
        if not 0 <= self.gates_applied <= self.n_env:
            raise ValueError("gates_applied must lie in [0, n_env]")

    @property
    def layout(self) -> SubsystemLayout:
        return SubsystemLayout([2] * (self.n_env + 1), ["S"] + [f"E{k + 1}" for k in range(self.n_env)])


def _check_k(model: CnotChainModel, k: int | None) -> int:
    k = model.gates_applied if k is None else int(k)
    if not 0 <= k <= model.n_env:
        raise ValueError(f"k = {k} outside [0, {model.n_env}]")
    return k


def run_cnot_chain(model: CnotChainModel, k: int | None = None) -> PureState:
    """a|0>|00..0> + b|1>|1..1 0..0> with the first k targets imprinted."""
    k = _check_k(model, k)
    layout = model.layout
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    amps[0] = model.a
    ones = (1,) + (1,) * k + (0,) * (model.n_env - k)
    amps[np.ravel_multi_index(ones, layout.dims)] = model.b
    return PureState(amps, layout)


def run_cnot_chain_gates(model: CnotChainModel, k: int | None = None) -> PureState:
    """Same state built gate by gate from |psi_S>|0...0>."""
    k = _check_k(model, k)
    layout = model.layout
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    amps[0] = model.a
    amps[layout.total_dim // 2] = model.b
    psi = PureState(amps, layout)
    for j in range(1, k + 1):
        psi = apply_local_unitary(psi, CNOT, (0, j))
    return psi


def cnot_chain_branch_state(model: CnotChainModel, k: int | None = None) -> BranchState:
    k = _check_k(model, k)
    s0 = np.zeros((model.n_env, 2))
    s0[:, 0] = 1.0
    s1 = s0.copy()
    s1[:k] = [0.0, 1.0]
    return BranchState((model.a, model.b), s0, s1)


def sigma_mu(mu: float) -> np.ndarray:
    return math.cos(mu) * SIGMA_Z + math.sin(mu) * SIGMA_X


def sigma_mu_observable(mu: float, subsystem=0) -> MeasurementBasis:
    """Eigenbasis of cos(mu) sigma_z + sin(mu) sigma_x; +1 eigenvector first."""
    c, s = math.cos(mu / 2), math.sin(mu / 2)
    return MeasurementBasis(np.array([[c, -s], [s, c]]), subsystem)
