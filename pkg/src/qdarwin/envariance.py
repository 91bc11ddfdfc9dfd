"""Envariance, fine-graining to even states, branch counting and record checks."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .qstate import (
    DensityMatrix, PureState, SubsystemLayout, VALIDATION_TOL, apply_local_unitary, bipartition,
    is_unitary, schmidt_decompose,
)

ENVARIANCE_TOL = 1e-9
RECORD_TOL = 1e-9
DEFAULT_MAX_DENOMINATOR = 2**20
DEFAULT_RATIONAL_TOL = 1e-6
_EXACT_RATIONAL_TOL = 1e-12
_DENSE_COUNT_LIMIT = 2**16


def _canonical_phase(v: np.ndarray) -> complex:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if not nz.size:
        return 1.0 + 0j
    return complex(v[nz[0]] / abs(v[nz[0]]))


@dataclass(frozen=True, eq=False)
class SchmidtFrame:
    """Complete Schmidt bases of a bipartite pure state.

    ``psi = sum_k a_k |s_k>|e_k>`` with ``a_k = |a_k| exp(-i phi_k)``. Both
    bases are full unitaries (columns); the first ``rank`` columns carry the
    Schmidt terms and every vector is phase fixed so that its first nonzero
    component is real positive.
    """

    left_basis: np.ndarray
    right_basis: np.ndarray
    amplitudes: np.ndarray  # complex a_k, length min(dL, dR)
    cut: tuple[tuple[int, ...], tuple[int, ...]]
    layout: SubsystemLayout

    @classmethod
    def of(cls, psi: PureState, cut=(0,)) -> "SchmidtFrame":
        dec = schmidt_decompose(psi, cut)
        left = dec.full_left.copy()
        right = dec.full_right.copy()
        for j in range(right.shape[1]):
            right[:, j] /= _canonical_phase(right[:, j])
        left_t = np.transpose(psi.tensor(), dec.cut[0] + dec.cut[1])
        m = left_t.reshape(left.shape[0], right.shape[0])
        k = min(m.shape)
        amps = np.einsum("ik,ij,jk->k", left[:, :k].conj(), m, right[:, :k].conj())
        return cls(left, right, amps, dec.cut, psi.layout)

    @property
    def coefficients(self) -> np.ndarray:
        return np.abs(self.amplitudes)

    @property
    def phases(self) -> np.ndarray:
        """phi_k = -arg a_k (0 for vanishing terms)."""
        a = self.amplitudes
        return np.where(np.abs(a) > 1e-12, -np.angle(a), 0.0)

    @property
    def n_terms(self) -> int:
        return self.amplitudes.size

    def side_basis(self, side: str) -> np.ndarray:
        return self.left_basis if side == "left" else self.right_basis

    def side_indices(self, side: str) -> tuple[int, ...]:
        return self.cut[0] if side == "left" else self.cut[1]

    def check_index(self, *ks: int) -> None:
        for k in ks:
            if not 0 <= k < self.n_terms:
                raise IndexError(f"Schmidt index {k} out of range for {self.n_terms} terms")


def _other(side: str) -> str:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return "right" if side == "left" else "left"


@dataclass(frozen=True)
class SchmidtLocalUnitary:
    """Phase rotation or swap written in the Schmidt basis of one side."""

    kind: str  # "phase" or "swap"
    phases: tuple[float, ...] = ()
    pair: tuple[int, int] = (0, 0)
    side: str = "left"

    def __post_init__(self):
        if self.kind not in ("phase", "swap"):
            raise ValueError(f"unknown kind {self.kind!r}")
        _other(self.side)

    @classmethod
    def phase(cls, phases: Sequence[float], side: str = "left") -> "SchmidtLocalUnitary":
        return cls("phase", tuple(float(p) for p in phases), side=side)

    @classmethod
    def swap(cls, k: int, l: int, side: str = "left") -> "SchmidtLocalUnitary":
        return cls("swap", pair=(int(k), int(l)), side=side)

    def matrix(self, frame: SchmidtFrame) -> np.ndarray:
        basis = frame.side_basis(self.side)
        d = basis.shape[0]
        if self.kind == "phase":
            if len(self.phases) > d:
                raise ValueError("more phases than basis states")
            diag = np.ones(d, dtype=np.complex128)
            diag[: len(self.phases)] = np.exp(1j * np.array(self.phases))
            return basis @ np.diag(diag) @ basis.conj().T
        k, l = self.pair
        frame.check_index(k, l)
        perm = np.eye(d, dtype=np.complex128)
        perm[[k, l]] = perm[[l, k]]
        return basis @ perm @ basis.conj().T

    def counter_matrix(self, frame: SchmidtFrame) -> np.ndarray:
        """The textbook countertransformation on the other side."""
        basis = frame.side_basis(_other(self.side))
        d = basis.shape[0]
        if self.kind == "phase":
            diag = np.ones(d, dtype=np.complex128)
            diag[: len(self.phases)] = np.exp(-1j * np.array(self.phases))
            return basis @ np.diag(diag) @ basis.conj().T
        k, l = self.pair
        frame.check_index(k, l)
        m = np.eye(d, dtype=np.complex128)
        if k != l:
            phi = frame.phases
            w = cmath.exp(1j * (phi[k] - phi[l]))
            m[k, k] = m[l, l] = 0.0
            m[l, k] = w
            m[k, l] = w.conjugate()
        return basis @ m @ basis.conj().T


def _apply_on_side(psi: PureState, frame: SchmidtFrame, side: str, u: np.ndarray) -> PureState:
    return apply_local_unitary(psi, u, frame.side_indices(side))


def schmidt_swap(psi: PureState, cut, k: int, l: int, side: str = "left",
                 frame: SchmidtFrame | None = None) -> PureState:
    """Exchange Schmidt states k and l on one side of the cut."""
    frame = frame or SchmidtFrame.of(psi, cut)
    u = SchmidtLocalUnitary.swap(k, l, side)
    return _apply_on_side(psi, frame, side, u.matrix(frame))


def schmidt_counterswap(psi: PureState, cut, k: int, l: int, side: str = "right",
                        frame: SchmidtFrame | None = None) -> PureState:
    """Phase-corrected exchange of Schmidt partners k and l on ``side``.

    ``frame`` should be the frame of the state before the swap; it defaults
    to the frame of ``psi`` itself.
    """
    frame = frame or SchmidtFrame.of(psi, cut)
    u = SchmidtLocalUnitary.swap(k, l, _other(side))
    return _apply_on_side(psi, frame, side, u.counter_matrix(frame))


@dataclass(frozen=True, eq=False)
class EnvarianceVerdict:
    envariant: bool
    fidelity: float
    witness: np.ndarray | None
    witness_kind: str | None  # "textbook", "polar" or None


def _overlap_operator(psi: PureState, eta: PureState, frame: SchmidtFrame, side: str) -> np.ndarray:
    """Tr_{not side}(|eta><psi|) as a matrix on ``side``."""
    keep = frame.side_indices(side)
    other = frame.side_indices(_other(side))
    dk = psi.layout.dim_of(keep)
    pe = np.transpose(eta.tensor(), other + keep).reshape(-1, dk)
    pp = np.transpose(psi.tensor(), other + keep).reshape(-1, dk)
    return pe.T @ pp.conj()


def optimal_counter_unitary(psi: PureState, eta: PureState, cut, side: str = "right"):
    """Best unitary on ``side`` mapping ``eta`` back to ``psi``.

    Returns ``(u, fidelity)``; fidelity = (trace norm of the overlap operator)^2.
    """
    frame = SchmidtFrame.of(psi, cut)
    x = _overlap_operator(psi, eta, frame, side)
    w, s, vh = np.linalg.svd(x)
    # <psi|(1 x u)|eta> = Tr(u X); maximised by u = V W^dagger
    u = vh.conj().T @ w.conj().T
    return u, float(np.sum(s) ** 2)


def verify_envariance(psi: PureState, u_local, cut=(0,), tol: float = ENVARIANCE_TOL) -> EnvarianceVerdict:
    """Can the action of ``u_local`` be undone on the other side alone?

    ``u_local`` is a ``SchmidtLocalUnitary`` or a plain unitary matrix on the
    left side of ``cut``.
    """
    frame = SchmidtFrame.of(psi, cut)
    if isinstance(u_local, SchmidtLocalUnitary):
        side = u_local.side
        u = u_local.matrix(frame)
    else:
        side = "left"
        u = np.asarray(u_local, dtype=np.complex128)
        if not is_unitary(u):
            raise ValueError("operator is not unitary within 1e-10")
    eta = _apply_on_side(psi, frame, side, u)
    counter_side = _other(side)
    if isinstance(u_local, SchmidtLocalUnitary):
        w = u_local.counter_matrix(frame)
        restored = _apply_on_side(eta, frame, counter_side, w)
        fid = psi.fidelity(restored)
        if fid >= 1 - tol:
            return EnvarianceVerdict(True, fid, w, "textbook")
    w, fid = optimal_counter_unitary(psi, eta, frame.cut[0], counter_side)
    if fid >= 1 - tol:
        return EnvarianceVerdict(True, fid, w, "polar")
    return EnvarianceVerdict(False, fid, None, None)


@dataclass(frozen=True)
class FineGrainPlan:
    """Branch k gets ``counts[k]`` of ``M`` equal fine-grained branches."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(m) for m in self.counts)
        if any(m < 0 for m in counts):
            raise ValueError("branch counts must be nonnegative")
        if sum(counts) == 0:
            raise ValueError("plan needs at least one branch")
        object.__setattr__(self, "counts", counts)

    @property
    def M(self) -> int:
        return sum(self.counts)

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(m, self.M) for m in self.counts)

    def assignment(self) -> list[tuple[int, int]]:
        """Fine-grained index ranges ``[start, stop)`` per branch."""
        out, start = [], 0
        for m in self.counts:
            out.append((start, start + m))
            start += m
        return out


def _complete_basis(vectors: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full basis by Gram-Schmidt on e_0, e_1, ..."""
    d = vectors.shape[0]
    cols = [vectors[:, i] for i in range(vectors.shape[1])]
    for j in range(d):
        if len(cols) == d:
            break
        v = np.zeros(d, dtype=np.complex128)
        v[j] = 1.0
        for c in cols:
            v = v - np.vdot(c, v) * c
        for c in cols:  # second pass for stability
            v = v - np.vdot(c, v) * c
        n = np.linalg.norm(v)
        if n > 1e-8:
            cols.append(v / n)
    return np.column_stack(cols)


def fine_grained_environment_basis(frame: SchmidtFrame, plan: FineGrainPlan) -> np.ndarray:
    """Basis {e_j} of E with e_j, j in block k, summing to sqrt(m_k) eps_k."""
    counts = plan.counts
    rank_needed = len(counts)
    if rank_needed > frame.n_terms:
        raise ValueError(f"plan has {rank_needed} branches, state has {frame.n_terms} Schmidt terms")
    d_e = frame.right_basis.shape[0]
    if d_e < plan.M:
        raise ValueError(f"environment dimension {d_e} is smaller than M = {plan.M}")
    used = [k for k, m in enumerate(counts) if m > 0]
    full = _complete_basis(frame.right_basis[:, used])
    spare = iter(range(len(used), d_e))
    out = np.zeros((d_e, d_e), dtype=np.complex128)
    col = 0
    for pos, k in enumerate(used):
        m = counts[k]
        block = [full[:, pos]] + [full[:, next(spare)] for _ in range(m - 1)]
        f = np.column_stack(block)
        dft = np.exp(2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m) / math.sqrt(m)
        out[:, col: col + m] = f @ dft
        col += m
    for j in spare:
        out[:, col] = full[:, j]
        col += 1
    return out


def fine_graining_unitary(env_basis: np.ndarray, M: int, d_c: int | None = None) -> np.ndarray:
    """Controlled shift on E (x) C: |e_j>|c_i> -> |e_j>|c_{i+j mod d_c}> for j < M."""
    d_e = env_basis.shape[0]
    d_c = d_c or M
    u = np.zeros((d_e * d_c, d_e * d_c), dtype=np.complex128)
    for j in range(d_e):
        proj = np.outer(env_basis[:, j], env_basis[:, j].conj())
        u += np.kron(proj, np.roll(np.eye(d_c), j if j < M else 0, axis=0))
    return u


def _apply_controlled_shift(t: np.ndarray, env_basis: np.ndarray, M: int) -> np.ndarray:
    """Same action as ``fine_graining_unitary`` on a (S, C, E) tensor, without the dense matrix."""
    x = np.einsum("sce,ej->scj", t, env_basis.conj())
    for j in range(1, min(M, x.shape[2])):
        x[:, :, j] = np.roll(x[:, :, j], j, axis=1)
    return np.einsum("scj,ej->sce", x, env_basis)


def fine_grain_to_even(psi: PureState, plan: FineGrainPlan, cut=(0,), tol: float = 1e-9) -> PureState:
    """Entangle E with a counter C so that S C | E is an even Schmidt state.

    ``psi`` is bipartite across ``cut``; the output layout is S (x) C (x) E
    with S and E each merged into one subsystem and C of dimension M. Only E
    and C are acted upon.
    """
    frame = SchmidtFrame.of(psi, cut)
    probs = frame.coefficients ** 2
    counts = list(plan.counts) + [0] * max(0, frame.n_terms - len(plan.counts))
    if len(counts) > frame.n_terms:
        raise ValueError(f"plan has {len(counts)} branches, state has {frame.n_terms} Schmidt terms")
    for k, m in enumerate(counts):
        if abs(probs[k] - m / plan.M) > tol:
            raise ValueError(
                f"Schmidt weight {probs[k]!r} of branch {k} does not match plan {m}/{plan.M}")
    plan = FineGrainPlan(tuple(counts))
    env_basis = fine_grained_environment_basis(frame, plan)
    d_s, d_e, M = frame.left_basis.shape[0], frame.right_basis.shape[0], plan.M
    left, right = frame.cut
    mat = np.transpose(psi.tensor(), left + right).reshape(d_s, d_e)
    d_c = max(M, 2)  # a single-branch counter still needs a qubit slot
    c0 = np.zeros(d_c)
    c0[0] = 1.0
    start = np.einsum("se,c->sce", mat, c0).reshape(-1)
    layout = SubsystemLayout([d_s, d_c, d_e], ("S", "C", "E"))
    out = _apply_controlled_shift(start.reshape(d_s, d_c, d_e), env_basis, M)
    return PureState(out.reshape(-1), layout)


def _convergents(x: float):
    a = math.floor(x)
    h_prev, h = 1, a
    k_prev, k = 0, 1
    yield Fraction(h, k)
    frac = x - a
    while frac > 1e-15:
        x = 1.0 / frac
        a = math.floor(x)
        frac = x - a
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        yield Fraction(h, k)
        if k > 2**40:
            return


def rational_approximation(x: float, tol: float, max_denominator: int) -> Fraction | None:
    """First continued-fraction convergent within ``tol`` of ``x``."""
    for c in _convergents(float(x)):
        if c.denominator > max_denominator:
            return None
        if abs(float(c) - x) <= tol:
            return c
    return None


def _rational_plan(probs: np.ndarray, tol: float, max_m: int) -> FineGrainPlan | None:
    fracs = []
    for p in probs:
        f = rational_approximation(p, tol, max_m)
        if f is None:
            return None
        fracs.append(f)
    if sum(fracs) != 1:
        return None
    M = math.lcm(*(f.denominator for f in fracs))
    if M > max_m:
        return None
    return FineGrainPlan(tuple(int(f * M) for f in fracs))


def _continuity_plan(probs: np.ndarray, M: int) -> FineGrainPlan:
    """Largest-remainder rounding of ``probs`` onto M branches."""
    raw = probs / probs.sum() * M
    base = np.floor(raw).astype(int)
    rem = M - int(base.sum())
    order = sorted(range(len(probs)), key=lambda k: (-(raw[k] - base[k]), k))
    for k in order[:rem]:
        base[k] += 1
    return FineGrainPlan(tuple(int(m) for m in base))


@dataclass(frozen=True)
class BornResult:
    probabilities: tuple[Fraction, ...]
    plan: FineGrainPlan
    schmidt_weights: tuple[float, ...]
    approximation_error: float
    continuity: bool
    counted_from_state: bool

    @property
    def M(self) -> int:
        return self.plan.M


def plan_for_state(psi: PureState, cut=(0,), tol: float = DEFAULT_RATIONAL_TOL,
                   max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> tuple[FineGrainPlan, bool]:
    """Rational plan for the Schmidt weights of ``psi``; flag is True for the continuity fallback."""
    probs = SchmidtFrame.of(psi, cut).coefficients ** 2
    probs = probs[: int(np.max(np.flatnonzero(probs > 1e-15), initial=0)) + 1]
    for t in (_EXACT_RATIONAL_TOL, tol):
        plan = _rational_plan(probs, t, max_denominator)
        if plan is not None:
            return plan, False
    return _continuity_plan(probs, max_denominator), True


def _count_branches(psi: PureState, plan: FineGrainPlan, cut) -> tuple[int, ...]:
    """Fine-grain, then count equal-weight S C | E branches per system outcome."""
    frame = SchmidtFrame.of(psi, cut)
    M = plan.M
    d_e = frame.right_basis.shape[0]
    if d_e < M:
        # give E an ancilla so that it can hold M fine-grained branches
        extra = -(-M // d_e)
        anc = np.zeros(extra)
        anc[0] = 1.0
        left, right = frame.cut
        mat = np.transpose(psi.tensor(), left + right).reshape(-1)
        psi = PureState(np.kron(mat, anc), [frame.left_basis.shape[0], d_e * extra])
        cut = (0,)
        frame = SchmidtFrame.of(psi, cut)
    even = fine_grain_to_even(psi, plan, cut)
    dec = schmidt_decompose(even, (0, 1))
    coeffs = dec.coefficients[dec.coefficients > 1e-9]
    if coeffs.size != M or np.max(np.abs(coeffs - 1 / math.sqrt(M))) > 1e-9:
        raise RuntimeError("fine-grained state is not even")
    d_s = frame.left_basis.shape[0]
    span = dec.left_vectors[:, : M]
    counts = []
    for k in range(len(plan.counts)):
        s_k = frame.left_basis[:, k]
        # dimension of the fine-grained Schmidt span lying in the |s_k> sector
        proj = np.einsum("s,sci->ci", s_k.conj(), span.reshape(d_s, -1, M))
        counts.append(int(round(float(np.sum(np.abs(proj) ** 2)))))
    return tuple(counts)


def born_probabilities(psi: PureState, cut=(0,), tol: float = DEFAULT_RATIONAL_TOL,
                       max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> BornResult:
    """Probabilities of Schmidt outcomes by counting fine-grained even branches."""
    frame = SchmidtFrame.of(psi, cut)
    weights = frame.coefficients ** 2
    plan, continuity = plan_for_state(psi, cut, tol, max_denominator)
    counted = False
    d_s = frame.left_basis.shape[0]
    if d_s * plan.M * max(plan.M, frame.right_basis.shape[0]) <= _DENSE_COUNT_LIMIT and not continuity:
        counts = _count_branches(psi, plan, cut)
        if counts != plan.counts:
            raise RuntimeError(f"branch count {counts} disagrees with plan {plan.counts}")
        counted = True
    probs = plan.probabilities
    err = max(abs(float(p) - w) for p, w in zip(probs, weights))
    return BornResult(probs, plan, tuple(float(w) for w in weights[: len(probs)]), err, continuity, counted)


@dataclass(frozen=True, eq=False)
class FrequencyDistribution:
    n: np.ndarray
    pmf: tuple  # Fractions in rational mode, floats otherwise
    mean: float | Fraction
    gaussian: np.ndarray | None
    max_gaussian_error: float | None

    @property
    def rational(self) -> bool:
        return bool(self.pmf) and isinstance(self.pmf[0], Fraction)


def frequency_distribution(p, trials: int) -> FrequencyDistribution:
    """Distribution of the number of ``p``-outcomes in ``trials`` repetitions.

    Pass a ``Fraction`` for exact rational arithmetic. The Gaussian
    approximation is centred at the mean ``p N`` with variance ``N p (1-p)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    n = np.arange(trials + 1)
    if isinstance(p, Fraction):
        q = 1 - p
        pmf = tuple(math.comb(trials, k) * p**k * q ** (trials - k) for k in range(trials + 1))
        mean = sum(k * w for k, w in enumerate(pmf))
        exact = np.array([float(w) for w in pmf])
    else:
        p = float(p)
        exact = binom.pmf(n, trials, p)
        pmf = tuple(float(w) for w in exact)
        mean = float(binom.mean(trials, p))
    pf = float(p)
    if 0 < pf < 1:
        sd = math.sqrt(trials * pf * (1 - pf))
        gauss = np.exp(-0.5 * ((n - pf * trials) / sd) ** 2) / (math.sqrt(2 * math.pi) * sd)
        err = float(np.max(np.abs(gauss - exact)))
    else:
        gauss, err = None, None
    return FrequencyDistribution(n, pmf, mean, gauss, err)


@dataclass(frozen=True)
class RecordCheck:
    consistent: bool
    violation: float


def _vector(x) -> np.ndarray:
    if isinstance(x, PureState):
        return x.amplitudes
    v = np.asarray(x, dtype=np.complex128).reshape(-1)
    if abs(np.linalg.norm(v) - 1) > VALIDATION_TOL:
        raise ValueError("state is not normalized")
    return v


def _density(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    v = _vector(x)
    return np.outer(v, v.conj())


def repeatability_orthogonality_check(s_a, s_b, e_a, e_b, tol: float = RECORD_TOL) -> RecordCheck:
    """Can a unitary premeasurement leave imprints ``e_a``, ``e_b`` of ``s_a``, ``s_b``?

    Pure imprints: violation = |<s_a|s_b> (1 - <e_a|e_b>)|. Mixed imprints:
    |<s_a|s_b>|^2 (Tr rho^2 - Tr rho_a rho_b), with Tr rho^2 taken as the
    geometric mean of the two purities (equal for unitarily related imprints).
    """
    ov = np.vdot(_vector(s_a), _vector(s_b))
    if isinstance(e_a, DensityMatrix) or isinstance(e_b, DensityMatrix):
        ra, rb = _density(e_a), _density(e_b)
        pa = float(np.real(np.vdot(ra, ra)))
        pb = float(np.real(np.vdot(rb, rb)))
        cross = float(np.real(np.vdot(ra, rb)))
        violation = abs(ov) ** 2 * max(math.sqrt(pa * pb) - cross, 0.0)
    else:
        violation = abs(ov * (1 - np.vdot(_vector(e_a), _vector(e_b))))
    return RecordCheck(violation < tol, float(violation))


def purify(rho: DensityMatrix) -> PureState:
    """Canonical purification on E (x) E' with E' a copy of E."""
    w, v = np.linalg.eigh(rho.matrix)
    w = np.clip(w, 0.0, None)
    d = w.size
    amps = sum(math.sqrt(w[i]) * np.kron(v[:, i], np.eye(d)[i]) for i in range(d))
    return PureState.from_unnormalized(amps, [d, d])


@dataclass(frozen=True)
class ChainCheck:
    product: complex
    log_terms: tuple[float, ...]
    log_initial: float
    implied_residual: complex
    consistent: bool


def chain_overlap_invariant(initial: complex, links: Sequence[complex], residual: complex | None = None,
                            tol: float = 1e-9) -> ChainCheck:
    """Overlap bookkeeping along a chain of records.

    Unitarity requires ``initial = residual * prod(links)``. Without an
    explicit ``residual`` (the remaining system overlap) the chain is
    consistent iff the implied residual ``initial / prod(links)`` is a
    possible overlap, i.e. has modulus <= 1. ``log_terms`` are the
    ``ln|o|^2`` of each link.
    """
    links = [complex(x) for x in links]
    if any(abs(x) > 1 + tol for x in links) or abs(initial) > 1 + tol:
        raise ValueError("overlaps must have modulus <= 1")
    product = complex(np.prod(links)) if links else 1.0 + 0j
    logs = tuple(2 * math.log(abs(x)) if abs(x) > 0 else -math.inf for x in links)
    log_initial = 2 * math.log(abs(initial)) if abs(initial) > 0 else -math.inf
    if residual is not None:
        implied = complex(residual)
        consistent = abs(implied * product - initial) <= tol
    elif abs(initial) <= tol:
        implied = 0j
        consistent = True
    elif abs(product) == 0:
        implied = complex(math.inf)
        consistent = False
    else:
        implied = complex(initial) / product
        consistent = abs(implied) <= 1 + tol
    return ChainCheck(product, logs, log_initial, implied, consistent)
