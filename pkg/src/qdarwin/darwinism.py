"""Fragments, partial information plots and redundancy."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .branch import BranchState, branch_mutual_information, system_entropy as branch_system_entropy
from .info import EntropyUnit, entropy_of_spectrum, pure_state_entropy, shannon_entropy
from .qstate import DensityMatrix, PureState, SubsystemLayout

EXHAUSTIVE_LIMIT = 1024
DEFAULT_SAMPLES = 64
_F_KEY_SCALE = 10**9


@dataclass(frozen=True)
class FragmentSpec:
    indices: tuple[int, ...]

    def __init__(self, indices, n_env: int | None = None):
        idx = tuple(sorted(int(i) for i in indices))
        if len(set(idx)) != len(idx):
            raise ValueError(f"fragment indices must be distinct, got {idx}")
        if idx and idx[0] < 0:
            raise IndexError("fragment indices must be nonnegative")
        if n_env is not None and idx and idx[-1] >= n_env:
            raise IndexError(f"fragment {idx} out of range for {n_env} environment subsystems")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def complement(self, n_env: int) -> "FragmentSpec":
        return FragmentSpec([i for i in range(n_env) if i not in set(self.indices)])


class StateProvider(Protocol):
    n_env: int
    descriptor: dict

    def system_entropy(self, unit: EntropyUnit) -> float: ...

    def mutual_information(self, fragments: Sequence[tuple[int, ...]], unit: EntropyUnit) -> np.ndarray: ...


class DenseProvider:
    """I(S:F) for a dense pure state; environment units are subsystem groups."""

    def __init__(self, psi: PureState, system: Sequence[int] = (0,), env_units=None, descriptor=None):
        self.psi = psi
        self.system = tuple(system)
        if env_units is None:
            env_units = [(i,) for i in range(psi.layout.n) if i not in self.system]
        self.env_units = [tuple(u) if not isinstance(u, (int, np.integer)) else (int(u),) for u in env_units]
        self.n_env = len(self.env_units)
        self.descriptor = descriptor or {"backend": "dense", "dims": list(psi.layout.dims)}

    def _subsystems(self, fragment) -> tuple[int, ...]:
        return tuple(sorted(i for k in fragment for i in self.env_units[k]))

    def system_entropy(self, unit=EntropyUnit.BITS) -> float:
        return pure_state_entropy(self.psi, self.system, unit)

    def mutual_information(self, fragments, unit=EntropyUnit.BITS) -> np.ndarray:
        h_s = self.system_entropy(unit)
        out = []
        for frag in fragments:
            if not len(frag):
                out.append(0.0)
                continue
            sub = self._subsystems(frag)
            h_f = pure_state_entropy(self.psi, sub, unit)
            h_sf = pure_state_entropy(self.psi, tuple(sorted(self.system + sub)), unit)
            out.append(h_s + h_f - h_sf)
        return np.array(out)


class BranchProvider:
    """I(S:F) for the two-branch product form; optionally restricted to some spins."""

    def __init__(self, state: BranchState, env_units: Sequence[int] | None = None, descriptor=None):
        self.state = state
        self.env_units = list(range(state.n_env)) if env_units is None else [int(i) for i in env_units]
        self.n_env = len(self.env_units)
        self.descriptor = descriptor or {"backend": "branch", "n_env": state.n_env}

    def system_entropy(self, unit=EntropyUnit.BITS) -> float:
        return branch_system_entropy(self.state, unit)

    def mutual_information(self, fragments, unit=EntropyUnit.BITS) -> np.ndarray:
        masks = np.zeros((len(fragments), self.state.n_env), dtype=bool)
        for r, frag in enumerate(fragments):
            masks[r, [self.env_units[k] for k in frag]] = True
        if not len(fragments):
            return np.zeros(0)
        return branch_mutual_information(self.state, masks, unit)


@dataclass(frozen=True, eq=False)
class PIPCurve:
    fractions: np.ndarray
    fragment_sizes: np.ndarray
    I_mean: np.ndarray
    I_stderr: np.ndarray
    n_samples: np.ndarray
    exhaustive: np.ndarray
    n_env: int
    samples_per_f: int
    seed: int
    unit: EntropyUnit
    system_entropy: float
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.fractions, dtype=float)
        if f.size and (np.any(np.diff(f) <= 0) or f[0] < 0 or f[-1] > 1):
            raise ValueError("fractions must be strictly increasing within [0, 1]")

    def rows(self):
        for f, i, e, n in zip(self.fractions, self.I_mean, self.I_stderr, self.n_samples):
            yield float(f), float(i), float(e), int(n)


def fragment_size(f: float, n_env: int) -> int:
    """Round half up of f N."""
    return int(math.floor(f * n_env + 0.5))


def _fraction_key(f: float) -> int:
    return int(round(f * _F_KEY_SCALE))


def sample_fragments(n_env: int, f: float, samples: int, seed: int,
                     exhaustive_limit: int = EXHAUSTIVE_LIMIT):
    """Fragments for one fraction: all of them if few enough, else seeded random draws.

    Sample i uses the stream SeedSequence([seed, key(f), i]), so any subset of
    samples can be regenerated independently.
    """
    m = fragment_size(f, n_env)
    if math.comb(n_env, m) <= exhaustive_limit:
        return [tuple(c) for c in itertools.combinations(range(n_env), m)], True
    key = _fraction_key(f)
    frags = []
    for i in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), key, i]))
        frags.append(tuple(sorted(int(x) for x in rng.choice(n_env, m, replace=False))))
    return frags, False


def partial_information_plot(provider, fractions, samples_per_f: int = DEFAULT_SAMPLES, seed: int = 0,
                             unit=EntropyUnit.BITS, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> PIPCurve:
    """Mean I(S:F) over typical fragments for each fraction f of the environment."""
    unit = EntropyUnit.coerce(unit)
    fr = sorted(set(float(f) for f in fractions))
    for f in fr:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fraction {f} outside [0, 1]")
    if samples_per_f < 2:
        raise ValueError("samples_per_f must be at least 2")
    n = provider.n_env
    sizes, means, errs, counts, exh = [], [], [], [], []
    for f in fr:
        frags, exhaustive = sample_fragments(n, f, samples_per_f, seed, exhaustive_limit)
        vals = np.asarray(provider.mutual_information(frags, unit), dtype=float)
        sizes.append(fragment_size(f, n))
        means.append(float(np.mean(vals)))
        errs.append(0.0 if exhaustive or vals.size < 2 else float(np.std(vals, ddof=1) / math.sqrt(vals.size)))
        counts.append(len(frags))
        exh.append(exhaustive)
    return PIPCurve(
        fractions=np.array(fr), fragment_sizes=np.array(sizes, dtype=int), I_mean=np.array(means),
        I_stderr=np.array(errs), n_samples=np.array(counts, dtype=int), exhaustive=np.array(exh),
        n_env=n, samples_per_f=samples_per_f, seed=int(seed), unit=unit,
        system_entropy=float(provider.system_entropy(unit)), descriptor=dict(provider.descriptor),
    )


class RedundancyRangeError(ValueError):
    """The information target is not bracketed by the available samples."""

    def __init__(self, target: float, achievable: tuple[float, float]):
        self.target = target
        self.achievable = achievable
        super().__init__(
            f"target information {target:.6g} not reached; achievable range "
            f"[{achievable[0]:.6g}, {achievable[1]:.6g}]")


@dataclass(frozen=True)
class RedundancyResult:
    delta: float
    f_delta: float | None
    R_delta: float
    interpolated: bool
    target: float = float("nan")
    system_entropy: float = float("nan")
    prediction: float | None = None
    ratio: float | None = None
    fragment_sizes: tuple[int, ...] = ()
    diagnostic: str = ""


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return delta


def redundancy_from_pip(curve: PIPCurve, delta: float, system_entropy: float | None = None) -> RedundancyResult:
    """f_delta where the PIP first reaches (1 - delta) H(S); R = 1 / f_delta.

    The curve is taken to start at (0, 0). When the bracketing samples are
    adjacent fragment sizes no interpolation is meaningful and the upper
    sampled fraction is returned; otherwise f_delta is interpolated linearly.
    """
    delta = _check_delta(delta)
    h_s = curve.system_entropy if system_entropy is None else float(system_entropy)
    target = (1 - delta) * h_s
    f = list(curve.fractions)
    i_vals = list(curve.I_mean)
    m = list(curve.fragment_sizes)
    if not f or f[0] > 0:
        f, i_vals, m = [0.0] + f, [0.0] + i_vals, [0] + m
    if target <= 0:
        raise RedundancyRangeError(target, (min(i_vals), max(i_vals)))
    hit = next((j for j, v in enumerate(i_vals) if v >= target - 1e-12), None)
    if hit is None or hit == 0:
        raise RedundancyRangeError(target, (min(i_vals), max(i_vals)))
    lo, hi = hit - 1, hit
    if m[hi] - m[lo] <= 1:
        f_delta, interp = f[hi], False
    else:
        w = (target - i_vals[lo]) / (i_vals[hi] - i_vals[lo])
        f_delta, interp = f[lo] + w * (f[hi] - f[lo]), True
    f_delta = float(f_delta)
    return RedundancyResult(delta, f_delta, 1.0 / f_delta, interp, float(target), h_s)


def observable_fragment_information(a: complex, b: complex, omega: complex, gamma: complex, mu: float,
                                    unit=EntropyUnit.BITS) -> tuple[float, float]:
    """I(sigma(mu) : Helstrom measurement on F) and H(sigma(mu)) for a branch fragment.

    ``omega`` is the in-fragment overlap <F_1|F_0>, ``gamma`` the decoherence
    factor of the rest of the environment. The fragment is represented in the
    span of its two conditional states.
    """
    r = math.sqrt(max(0.0, 1.0 - abs(omega) ** 2))
    f0 = np.array([1.0, 0.0], dtype=np.complex128)
    f1 = np.array([np.conj(omega), r], dtype=np.complex128)
    u0 = np.kron([1.0, 0.0], f0)
    u1 = np.kron([0.0, 1.0], f1)
    cross = a * np.conj(b) * gamma * np.outer(u0, u1.conj())
    rho = abs(a) ** 2 * np.outer(u0, u0.conj()) + abs(b) ** 2 * np.outer(u1, u1.conj()) + cross + cross.conj().T
    c, s = math.cos(mu / 2), math.sin(mu / 2)
    t = rho.reshape(2, 2, 2, 2)
    k_plus = np.einsum("i,iajb,j->ab", np.array([c, s]), t, np.array([c, s]))
    k_minus = np.einsum("i,iajb,j->ab", np.array([-s, c]), t, np.array([-s, c]))
    _, vecs = np.linalg.eigh(k_plus - k_minus)
    joint = np.array([[np.real(vecs[:, j].conj() @ k @ vecs[:, j]) for j in range(2)] for k in (k_plus, k_minus)])
    joint = np.clip(joint, 0.0, None)
    h_obs = shannon_entropy(joint.sum(axis=1), unit)
    info = h_obs + shannon_entropy(joint.sum(axis=0), unit) - shannon_entropy(joint.ravel(), unit)
    return info, h_obs


def redundancy_of_observable(state: BranchState, mu: float, delta: float, partition: str = "sequential",
                             seed: int | None = None, unit=EntropyUnit.BITS) -> RedundancyResult:
    """Count disjoint fragments that each reveal (1 - delta) of the sigma(mu) entropy.

    Fragments are grown greedily in spin order ("sequential") or in a seeded
    random order ("shuffled"); each is closed as soon as it reaches the target.
    """
    delta = _check_delta(delta)
    n = state.n_env
    if partition == "sequential":
        order = list(range(n))
    elif partition == "shuffled":
        if seed is None:
            raise ValueError("shuffled partition needs a seed")
        order = [int(i) for i in np.random.default_rng(seed).permutation(n)]
    else:
        raise ValueError(f"unknown partition scheme {partition!r}")
    a, b = state.branch_amplitudes
    ov = state.overlaps()
    _, h_obs = observable_fragment_information(a, b, 1.0, np.prod(ov), mu, unit)
    target = (1 - delta) * h_obs
    if h_obs < 1e-12:
        return RedundancyResult(delta, None, 0.0, False, target, h_obs, diagnostic="observable has no entropy")
    sizes, current = [], []
    best = 0.0
    for k in order:
        current.append(k)
        mask = np.zeros(n, dtype=bool)
        mask[current] = True
        info, _ = observable_fragment_information(a, b, np.prod(ov[mask]), np.prod(ov[~mask]), mu, unit)
        best = max(best, info)
        if info >= target - 1e-12:
            sizes.append(len(current))
            current = []
    count = len(sizes)
    if count == 0:
        return RedundancyResult(delta, None, 0.0, False, target, h_obs,
                                diagnostic=f"no fragment reaches the target {target:.6g}; best {best:.6g}")
    f_delta = 1.0 / count
    return RedundancyResult(delta, f_delta, float(count), False, target, h_obs, fragment_sizes=tuple(sizes))


def decohered_by_fragment(state, fragment, system: int = 0, tol: float = 1e-8) -> DensityMatrix:
    """State of S decohered by the fragment F alone.

    rho[k, l] = sqrt(p_k p_l) e^{i(phi_k - phi_l)} <F_l|F_k> in the pointer
    basis. For a dense ``PureState`` the pointer basis is the computational
    basis of ``system`` and each branch must factor across F and the rest.
    """
    if isinstance(state, BranchState):
        idx = FragmentSpec(getattr(fragment, "indices", fragment), state.n_env).indices
        a, b = state.branch_amplitudes
        omega = np.prod(state.overlaps()[list(idx)]) if idx else 1.0
        off = a * np.conj(b) * omega
        m = np.array([[abs(a) ** 2, off], [np.conj(off), abs(b) ** 2]])
        return DensityMatrix(m, SubsystemLayout([2]))
    psi: PureState = state
    layout = psi.layout
    frag = tuple(sorted(getattr(fragment, "indices", fragment)))
    layout.check_indices(frag + (system,))
    rest = [i for i in range(layout.n) if i != system and i not in frag]
    d_s = layout.dims[system]
    d_f = layout.dim_of(frag)
    t = np.transpose(psi.tensor(), [system] + list(frag) + rest).reshape(d_s, d_f, -1)
    weighted = np.zeros((d_s, d_f), dtype=np.complex128)
    for k in range(d_s):
        if np.linalg.norm(t[k]) < 1e-14:
            continue
        u, s, vh = np.linalg.svd(t[k], full_matrices=False)
        if s.size > 1 and s[1] > tol * max(s[0], 1.0):
            raise ValueError("branch states do not factor across the fragment and the rest")
        weighted[k] = s[0] * u[:, 0]
    m = weighted @ weighted.conj().T
    return DensityMatrix(m, SubsystemLayout([d_s]))


def entropy_decohered_by_fragment(state, fragment, unit=EntropyUnit.BITS, system: int = 0) -> float:
    return entropy_of_spectrum(np.linalg.eigvalsh(decohered_by_fragment(state, fragment, system).matrix), unit)
