"""Entropies, mutual informations and discord for dense density matrices."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .qstate import DensityMatrix, PureState, marginal_spectrum, partial_trace

EIG_FLOOR = 1e-12
LN2 = math.log(2.0)


class EntropyUnit(enum.Enum):
    BITS = "bits"
    NATS = "nats"

    @property
    def per_nat(self) -> float:
        """Multiply a value in nats by this to express it in this unit."""
        return 1.0 / LN2 if self is EntropyUnit.BITS else 1.0

    @classmethod
    def coerce(cls, unit) -> "EntropyUnit":
        if isinstance(unit, cls):
            return unit
        return cls(str(unit).lower())

    def from_nats(self, value):
        return value * self.per_nat

    def to_nats(self, value):
        return value / self.per_nat


BITS = EntropyUnit.BITS
NATS = EntropyUnit.NATS


class UnsupportedConfigurationError(ValueError):
    """Requested computation is outside the supported parameter range."""


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Rank-1 projective measurement on one subsystem (or a group of them).

    ``vectors`` holds the basis vectors as columns; ``subsystem`` is the index
    (or tuple of indices, in layout order) the measurement acts on.
    """

    vectors: np.ndarray
    subsystem: int | tuple[int, ...]

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"basis must be a square matrix of column vectors, got shape {v.shape}")
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(v.shape[0]))) > 1e-9:
            raise ValueError("basis vectors are not orthonormal and complete within 1e-9")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        sub = self.subsystem
        if not isinstance(sub, (int, np.integer)):
            sub = tuple(int(i) for i in sub)
            if len(sub) == 1:
                sub = sub[0]
        else:
            sub = int(sub)
        object.__setattr__(self, "subsystem", sub)

    @property
    def targets(self) -> tuple[int, ...]:
        return (self.subsystem,) if isinstance(self.subsystem, int) else self.subsystem

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def computational(cls, dim: int, subsystem) -> "MeasurementBasis":
        return cls(np.eye(dim), subsystem)

    @classmethod
    def from_bloch(cls, theta: float, phi: float, subsystem) -> "MeasurementBasis":
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        e = complex(math.cos(phi), math.sin(phi))
        n = np.array([c, e * s])
        n_perp = np.array([-np.conj(e) * s, c])
        return cls(np.column_stack([n, n_perp]), subsystem)

    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ik,jk->kij", v, v.conj())


def _unit(unit) -> EntropyUnit:
    return EntropyUnit.coerce(unit)


def entropy_of_spectrum(eigenvalues, unit=EntropyUnit.BITS) -> float:
    """-sum lam log lam with eigenvalues below 1e-12 dropped."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > EIG_FLOOR]
    return float(-np.sum(lam * np.log(lam))) * _unit(unit).per_nat


def shannon_entropy(p, unit=EntropyUnit.BITS) -> float:
    return entropy_of_spectrum(p, unit)


def von_neumann_entropy(rho: DensityMatrix, unit=EntropyUnit.BITS) -> float:
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.matrix), unit)


def pure_state_entropy(psi: PureState, subset: Iterable[int], unit=EntropyUnit.BITS) -> float:
    """Entropy of the marginal of a pure state, via the smaller side of the cut."""
    return entropy_of_spectrum(marginal_spectrum(psi, subset), unit)


def _normalise_cut(rho: DensityMatrix, cut) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n = rho.layout.n
    cut = tuple(cut)
    if len(cut) == 2 and all(not isinstance(c, (int, np.integer)) for c in cut):
        left = tuple(sorted(rho.layout.check_indices(cut[0])))
        right = tuple(sorted(rho.layout.check_indices(cut[1])))
        if set(left) & set(right):
            raise ValueError("the two sides of a cut must be disjoint")
    else:
        left = tuple(sorted(rho.layout.check_indices(cut)))
        right = tuple(i for i in range(n) if i not in left)
    if not left or not right:
        raise ValueError("both sides of the cut must be nonempty")
    return left, right


def _marginal(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = tuple(sorted(keep))
    if len(keep) == rho.layout.n:
        return rho
    return partial_trace(rho, keep)


def mutual_information(rho: DensityMatrix, cut, unit=EntropyUnit.BITS) -> float:
    """I(L:R) = H(L) + H(R) - H(LR).

    ``cut`` is either the left index set (right = complement) or a pair
    ``(left, right)``; subsystems in neither part are traced out.
    """
    left, right = _normalise_cut(rho, cut)
    h_l = von_neumann_entropy(_marginal(rho, left), unit)
    h_r = von_neumann_entropy(_marginal(rho, right), unit)
    h_lr = von_neumann_entropy(_marginal(rho, left + right), unit)
    return h_l + h_r - h_lr


def _measured_blocks(rho: DensityMatrix, targets: Sequence[int], rest: Sequence[int]) -> np.ndarray:
    """``rho`` on targets+rest as a tensor of shape (dA, dR, dA, dR)."""
    sub = _marginal(rho, tuple(targets) + tuple(rest))
    layout = sub.layout
    kept = sorted(tuple(targets) + tuple(rest))
    pos = {k: i for i, k in enumerate(kept)}
    a = [pos[i] for i in targets]
    r = [pos[i] for i in rest]
    n = layout.n
    t = sub.tensor()
    t = np.transpose(t, a + r + [n + i for i in a] + [n + i for i in r])
    da = int(np.prod([layout.dims[i] for i in a]))
    dr = int(np.prod([layout.dims[i] for i in r])) if r else 1
    return t.reshape(da, dr, da, dr)


def _rest_of(rho: DensityMatrix, targets: Sequence[int], rest) -> tuple[int, ...]:
    if rest is None:
        return tuple(i for i in range(rho.layout.n) if i not in targets)
    rest = tuple(sorted(rho.layout.check_indices(rest)))
    if set(rest) & set(targets):
        raise ValueError("measured and unmeasured subsystems overlap")
    return rest


def _check_basis(rho: DensityMatrix, basis: MeasurementBasis) -> tuple[int, ...]:
    targets = rho.layout.check_indices(basis.targets)
    if list(targets) != sorted(targets):
        raise ValueError("basis subsystems must be listed in layout order")
    if rho.layout.dim_of(targets) != basis.dim:
        raise ValueError(
            f"basis dimension {basis.dim} does not match subsystem dimension {rho.layout.dim_of(targets)}")
    return targets


def outcome_probabilities(rho: DensityMatrix, basis: MeasurementBasis) -> np.ndarray:
    targets = _check_basis(rho, basis)
    m = _marginal(rho, targets).matrix
    v = basis.vectors
    p = np.real(np.einsum("ik,ij,jk->k", v.conj(), m, v))
    return np.clip(p, 0.0, None)


def shannon_entropy_of_measurement(rho: DensityMatrix, basis: MeasurementBasis,
                                   unit=EntropyUnit.BITS) -> float:
    return shannon_entropy(outcome_probabilities(rho, basis), unit)


def conditional_states(rho: DensityMatrix, basis: MeasurementBasis, rest=None):
    """Outcome probabilities and normalised post-measurement states of the rest.

    States of outcomes with p < 1e-12 are returned as ``None``.
    """
    targets = _check_basis(rho, basis)
    rest = _rest_of(rho, targets, rest)
    if not rest:
        raise ValueError("nothing left unmeasured")
    t = _measured_blocks(rho, targets, rest)
    v = basis.vectors
    blocks = np.einsum("ak,arbs,bk->krs", v.conj(), t, v)
    probs = np.real(np.einsum("krr->k", blocks))
    states = []
    for p, b in zip(probs, blocks):
        states.append(b / p if p >= EIG_FLOOR else None)
    return np.clip(probs, 0.0, None), states


def conditional_entropy_given_measurement(rho: DensityMatrix, basis: MeasurementBasis,
                                          unit=EntropyUnit.BITS, rest=None) -> float:
    """sum_k p_k H(rho_{rest|k}) for a projective measurement on ``basis``."""
    probs, states = conditional_states(rho, basis, rest)
    total = 0.0
    for p, s in zip(probs, states):
        if s is not None:
            total += p * entropy_of_spectrum(np.linalg.eigvalsh(s), unit)
    return float(total)


def joint_outcome_distribution(rho: DensityMatrix, basis_s: MeasurementBasis,
                               basis_a: MeasurementBasis) -> np.ndarray:
    ts = _check_basis(rho, basis_s)
    ta = _check_basis(rho, basis_a)
    if set(ts) & set(ta):
        raise ValueError("the two measurements must act on disjoint subsystems")
    t = _measured_blocks(rho, ts, ta)
    vs, va = basis_s.vectors, basis_a.vectors
    ds, da = vs.shape[0], va.shape[0]
    t = t.reshape(ds, da, ds, da)
    p = np.real(np.einsum("aj,bk,abcd,cj,dk->jk", vs.conj(), va.conj(), t, vs, va))
    return np.clip(p, 0.0, None)


def classical_mutual_information(joint, unit=EntropyUnit.BITS) -> float:
    joint = np.asarray(joint, dtype=float)
    return (shannon_entropy(joint.sum(axis=1), unit) + shannon_entropy(joint.sum(axis=0), unit)
            - shannon_entropy(joint.ravel(), unit))


def observable_mutual_information(rho: DensityMatrix, basis_s: MeasurementBasis,
                                  basis_a: MeasurementBasis, unit=EntropyUnit.BITS) -> float:
    """Classical mutual information of the joint outcome distribution."""
    return classical_mutual_information(joint_outcome_distribution(rho, basis_s, basis_a), unit)


def quantum_discord(rho: DensityMatrix, basis_a: MeasurementBasis, unit=EntropyUnit.BITS,
                    rest=None) -> float:
    """I(S:A) - J(S:{A_k}) with the measurement on A and S = ``rest``.

    Equivalent to H(A) - H(SA) + H(S|{A_k}).
    """
    targets = _check_basis(rho, basis_a)
    rest = _rest_of(rho, targets, rest)
    h_a = von_neumann_entropy(_marginal(rho, targets), unit)
    h_sa = von_neumann_entropy(_marginal(rho, targets + rest), unit)
    return h_a - h_sa + conditional_entropy_given_measurement(rho, basis_a, unit, rest)


N_THETA = 64
N_PHI = 128
REFINE_ROUNDS = 3
REFINE_POINTS = 9
REFINE_SHRINK = 4.0


def _grid_search(blocks: np.ndarray) -> tuple[float, float, float]:
    thetas = np.arange(N_THETA) * (math.pi / (N_THETA - 1))
    phis = np.arange(N_PHI) * (2 * math.pi / N_PHI)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    vals = kernels.qubit_conditional_entropies(blocks, tt.ravel(), pp.ravel())
    best = int(np.argmin(vals))
    theta, phi, value = float(tt.ravel()[best]), float(pp.ravel()[best]), float(vals[best])
    dt, dp = math.pi / (N_THETA - 1), 2 * math.pi / N_PHI
    offsets = np.arange(REFINE_POINTS) - (REFINE_POINTS - 1) // 2
    for _ in range(REFINE_ROUNDS):
        dt /= REFINE_SHRINK
        dp /= REFINE_SHRINK
        gt, gp = np.meshgrid(theta + offsets * dt, phi + offsets * dp, indexing="ij")
        vals = kernels.qubit_conditional_entropies(blocks, gt.ravel(), gp.ravel())
        i = int(np.argmin(vals))
        if vals[i] < value:
            theta, phi, value = float(gt.ravel()[i]), float(gp.ravel()[i]), float(vals[i])
    return theta, phi, value


def optimal_discord_measurement(rho: DensityMatrix, side, unit=EntropyUnit.BITS, rest=None):
    """Minimise discord over projective qubit measurements on ``side``.

    Returns ``(discord, basis)``. The search covers the Bloch sphere on a
    64 x 128 grid followed by three rounds of 9 x 9 local refinement, each
    shrinking the step fourfold. Ties go to the smallest grid index.
    """
    targets = rho.layout.check_indices((side,) if isinstance(side, (int, np.integer)) else side)
    targets = tuple(sorted(targets))
    dim = rho.layout.dim_of(targets)
    if dim > 2:
        raise UnsupportedConfigurationError(
            f"discord minimisation supports a qubit measured side only (got dimension {dim})")
    rest = _rest_of(rho, targets, rest)
    if not rest:
        raise ValueError("nothing left unmeasured")
    t = _measured_blocks(rho, targets, rest)
    blocks = np.transpose(t, (0, 2, 1, 3))
    theta, phi, cond_nats = _grid_search(blocks)
    u = _unit(unit)
    h_a = von_neumann_entropy(_marginal(rho, targets), u)
    h_sa = von_neumann_entropy(_marginal(rho, targets + rest), u)
    basis = MeasurementBasis.from_bloch(theta, phi, targets)
    return h_a - h_sa + u.from_nats(cond_nats), basis


def min_discord(rho: DensityMatrix, side, unit=EntropyUnit.BITS, rest=None) -> float:
    return optimal_discord_measurement(rho, side, unit, rest)[0]
