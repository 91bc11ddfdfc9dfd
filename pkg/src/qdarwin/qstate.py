"""Dense states over tensor-product Hilbert spaces.

Amplitudes are stored row-major over the layout: the leftmost subsystem is the
most significant index, and the system is always listed first.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

VALIDATION_TOL = 1e-10
IDENTITY_TOL = 1e-9

_dimension_cap = 2**22


class DimensionCapError(ValueError):
    """Total Hilbert-space dimension exceeds the configured cap."""


def get_dimension_cap() -> int:
    return _dimension_cap


def set_dimension_cap(cap: int) -> int:
    """Set the maximum total dimension; returns the previous value."""
    global _dimension_cap
    if cap < 1:
        raise ValueError("dimension cap must be positive")
    previous, _dimension_cap = _dimension_cap, int(cap)
    return previous


@contextlib.contextmanager
def dimension_cap(cap: int):
    previous = set_dimension_cap(cap)
    try:
        yield
    finally:
        set_dimension_cap(previous)


@dataclass(frozen=True)
class SubsystemLayout:
    dims: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __init__(self, dims: Iterable[int], labels: Iterable[str] | None = None):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("layout needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        total = int(np.prod(dims, dtype=object))
        if total > _dimension_cap:
            raise DimensionCapError(f"total dimension {total} exceeds cap {_dimension_cap}")
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != len(dims):
                raise ValueError("labels must match dims in length")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    def sub(self, indices: Sequence[int]) -> "SubsystemLayout":
        labels = None if self.labels is None else [self.labels[i] for i in indices]
        return SubsystemLayout([self.dims[i] for i in indices], labels)

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        if self.labels is None and other.labels is None:
            labels = None
        else:
            labels = (self.labels or ("",) * self.n) + (other.labels or ("",) * other.n)
        return SubsystemLayout(self.dims + other.dims, labels)

    def dim_of(self, indices: Iterable[int]) -> int:
        return int(np.prod([self.dims[i] for i in indices], dtype=int))

    def check_indices(self, indices: Iterable[int]) -> tuple[int, ...]:
        idx = tuple(int(i) for i in indices)
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated subsystem index in {idx}")
        for i in idx:
            if not 0 <= i < self.n:
                raise IndexError(f"subsystem index {i} out of range for {self.n} subsystems")
        return idx


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        object.__setattr__(self, "layout", _as_layout(self.layout))
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.layout.total_dim:
            raise ValueError(
                f"{amps.shape[0]} amplitudes do not match layout dimension {self.layout.total_dim}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > VALIDATION_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes, layout) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(amps / np.linalg.norm(amps), _as_layout(layout))

    @classmethod
    def basis(cls, layout, index: int | Sequence[int]) -> "PureState":
        layout = _as_layout(layout)
        amps = np.zeros(layout.total_dim, dtype=np.complex128)
        if not isinstance(index, (int, np.integer)):
            index = int(np.ravel_multi_index(tuple(index), layout.dims))
        amps[index] = 1.0
        return cls(amps, layout)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def fidelity(self, other: "PureState") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def density(self) -> "DensityMatrix":
        return DensityMatrix.from_pure(self)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        object.__setattr__(self, "layout", _as_layout(self.layout))
        m = np.array(self.matrix, dtype=np.complex128)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match layout dimension {d}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > VALIDATION_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > VALIDATION_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if d <= 4096:
            lo = np.linalg.eigvalsh(m).min()
            if lo < -VALIDATION_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {lo!r}")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()), psi.layout)

    @classmethod
    def maximally_mixed(cls, layout) -> "DensityMatrix":
        layout = _as_layout(layout)
        d = layout.total_dim
        return cls(np.eye(d) / d, layout)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def tensor(self) -> np.ndarray:
        dims = self.layout.dims
        return self.matrix.reshape(dims + dims)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``psi = sum_k c_k |l_k>|r_k>`` across ``cut = (left, right)``.

    ``left_vectors`` / ``right_vectors`` hold the vectors as columns, in the
    combined index order of the left and right subsystems respectively.
    """

    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    cut: tuple[tuple[int, ...], tuple[int, ...]]
    left_layout: SubsystemLayout
    right_layout: SubsystemLayout
    full_left: np.ndarray = field(repr=False, default=None)
    full_right: np.ndarray = field(repr=False, default=None)

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > IDENTITY_TOL))

    def reconstruct(self, layout: SubsystemLayout) -> PureState:
        mat = (self.left_vectors * self.coefficients[None, :]) @ self.right_vectors.T
        left, right = self.cut
        t = mat.reshape(self.left_layout.dims + self.right_layout.dims)
        order = list(left) + list(right)
        t = np.transpose(t, np.argsort(order))
        return PureState(t.reshape(-1), layout)


def _as_layout(layout) -> SubsystemLayout:
    if isinstance(layout, SubsystemLayout):
        return layout
    return SubsystemLayout(layout)


def tensor_product(a: PureState, b: PureState) -> PureState:
    layout = a.layout.concat(b.layout)
    return PureState(np.kron(a.amplitudes, b.amplitudes), layout)


def bipartition(layout: SubsystemLayout, left: Iterable[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Normalise a cut given by its left part; the right part is the complement."""
    left = tuple(sorted(layout.check_indices(left)))
    right = tuple(i for i in range(layout.n) if i not in left)
    if not left or not right:
        raise ValueError("bipartition needs two nonempty parts")
    return left, right


def _cut_matrix(psi: PureState, left: Sequence[int], right: Sequence[int]) -> np.ndarray:
    t = psi.tensor()
    t = np.transpose(t, list(left) + list(right))
    return t.reshape(psi.layout.dim_of(left), psi.layout.dim_of(right))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep``, kept subsystems in original order."""
    layout = rho.layout
    keep = tuple(sorted(layout.check_indices(keep)))
    if not keep or len(keep) == layout.n:
        raise ValueError("keep must be a nonempty strict subset of subsystems")
    traced = [i for i in range(layout.n) if i not in keep]
    n = layout.n
    t = rho.tensor()
    perm = list(keep) + traced + [n + i for i in keep] + [n + i for i in traced]
    dk, dt = layout.dim_of(keep), layout.dim_of(traced)
    t = np.transpose(t, perm).reshape(dk, dt, dk, dt)
    return DensityMatrix(np.einsum("ajbj->ab", t), layout.sub(keep))


def reduced_density(psi: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Marginal of a pure state without forming the global density matrix."""
    layout = psi.layout
    keep = tuple(sorted(layout.check_indices(keep)))
    if not keep:
        raise ValueError("keep must be nonempty")
    if len(keep) == layout.n:
        return DensityMatrix.from_pure(psi)
    traced = [i for i in range(layout.n) if i not in keep]
    m = _cut_matrix(psi, keep, traced)
    return DensityMatrix(m @ m.conj().T, layout.sub(keep))


def marginal_spectrum(psi: PureState, subset: Iterable[int]) -> np.ndarray:
    """Eigenvalues of the marginal on ``subset``, computed on the smaller side."""
    layout = psi.layout
    subset = tuple(sorted(layout.check_indices(subset)))
    if not subset or len(subset) == layout.n:
        return np.array([1.0])
    rest = tuple(i for i in range(layout.n) if i not in subset)
    m = _cut_matrix(psi, subset, rest)
    gram = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.conj().T @ m
    return np.linalg.eigvalsh(gram)


def schmidt_decompose(psi: PureState, cut: Iterable[int]) -> SchmidtDecomposition:
    """Schmidt decomposition across ``cut`` (indices of the left part).

    Coefficients are descending; each left vector has its first nonzero
    component made real positive, with the phase moved into the right vector.
    """
    left, right = bipartition(psi.layout, cut)
    m = _cut_matrix(psi, left, right)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    k = min(m.shape)
    v = vh.T  # m = u diag(s) v^T with v = vh^T
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            u[:, j] = col / ph
            if j < v.shape[1]:
                v[:, j] = v[:, j] * ph
    return SchmidtDecomposition(
        coefficients=s[:k].copy(),
        left_vectors=u[:, :k].copy(),
        right_vectors=v[:, :k].copy(),
        cut=(left, right),
        left_layout=psi.layout.sub(left),
        right_layout=psi.layout.sub(right),
        full_left=u,
        full_right=v,
    )


def is_unitary(u: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def _apply_operator(psi: PureState, op: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    layout = psi.layout
    targets = layout.check_indices(targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    dt = layout.dim_of(targets)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (dt, dt):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {dt}")
    rest = [i for i in range(layout.n) if i not in targets]
    perm = list(targets) + rest
    t = np.transpose(psi.tensor(), perm).reshape(dt, -1)
    t = (op @ t).reshape([layout.dims[i] for i in perm])
    return np.transpose(t, np.argsort(perm)).reshape(-1)


def apply_local_unitary(psi: PureState, u: np.ndarray, targets: Iterable[int]) -> PureState:
    """Apply ``u`` to the subsystems ``targets`` (in the order given)."""
    u = np.asarray(u, dtype=np.complex128)
    if not is_unitary(u):
        raise ValueError("operator is not unitary within 1e-10")
    return PureState(_apply_operator(psi, u, tuple(targets)), psi.layout)


def haar_random_state(layout, seed) -> PureState:
    """Haar-distributed pure state; identical seeds give identical amplitudes."""
    layout = _as_layout(layout)
    rng = np.random.default_rng(seed)
    d = layout.total_dim
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(z / np.linalg.norm(z), layout)


def haar_average_purity(d_s: int, d_e: int) -> float:
    """Mean purity of a d_s marginal of a Haar state on d_s * d_e."""
    return (d_s + d_e) / (d_s * d_e + 1)
