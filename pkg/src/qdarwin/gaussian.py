"""Gaussian quantum Brownian motion: an oscillator linearly coupled to a discretised ohmic bath.

Phase-space ordering is (x_S, p_S, x_1, p_1, ...), hbar = 1, and the quadratic
Hamiltonian is H = z^T Hm z / 2. Entropies default to nats.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .darwinism import (
    DEFAULT_SAMPLES, PIPCurve, RedundancyResult, partial_information_plot, redundancy_from_pip,
)
from .info import EntropyUnit

AREA_TOL = 1e-8
UNCERTAINTY_TOL = 1e-8


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class InvalidGaussianStateError(ValueError):
    """Covariance violates the uncertainty principle."""


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.covariance, dtype=float)
        if cov.shape != (mu.size, mu.size) or mu.size % 2:
            raise ValueError("covariance must be square with an even side matching the mean")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("covariance is not symmetric")
        cov = (cov + cov.T) / 2
        mu.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def check_uncertainty(self, scale: np.ndarray | None = None) -> float:
        """Smallest symplectic eigenvalue; raises if below 1/2 (1 - 1e-8)."""
        nu = symplectic_eigenvalues(self.covariance if scale is None else _scale_cov(self.covariance, scale))
        lo = float(np.min(nu))
        if lo < 0.5 * (1 - UNCERTAINTY_TOL):
            raise InvalidGaussianStateError(f"symplectic eigenvalue {lo!r} below 1/2")
        return lo


def _mode_indices(modes) -> np.ndarray:
    modes = np.asarray(list(modes), dtype=int)
    return np.ravel(np.column_stack([2 * modes, 2 * modes + 1]))


def _scale_cov(cov: np.ndarray, scale: np.ndarray) -> np.ndarray:
    return cov * np.outer(scale, scale)


def symplectic_eigenvalues(cov: np.ndarray, modes=None) -> np.ndarray:
    """Symplectic eigenvalues (nu >= 1/2 convention) of a covariance or a mode subset."""
    cov = np.asarray(cov, dtype=float)
    if modes is not None:
        ii = _mode_indices(modes)
        cov = cov[np.ix_(ii, ii)]
    n = cov.shape[0] // 2
    if n == 0:
        return np.zeros(0)
    chol = np.linalg.cholesky(cov)
    ev = np.linalg.eigvalsh(1j * (chol.T @ symplectic_form(n) @ chol))
    return np.sort(ev[n:])


def symplectic_area(cov: np.ndarray) -> float:
    """a = (hbar/2)^-n sqrt(det cov); a = 1 for a pure single-mode Gaussian.

    For n modes this is the product of the per-mode areas 2 nu_k.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise InvalidGaussianStateError("covariance is not positive definite")
    return float(math.exp(0.5 * logdet + n * math.log(2.0)))


def gaussian_entropy_from_area(a, unit=EntropyUnit.NATS):
    """H(a) = ((a+1) ln(a+1) - (a-1) ln(a-1)) / 2 - ln 2 for a single mode."""
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 1 - AREA_TOL):
        raise InvalidGaussianStateError(f"symplectic area below 1: {np.min(a_arr)!r}")
    a_arr = np.maximum(a_arr, 1.0)
    am1 = a_arr - 1
    h = 0.5 * ((a_arr + 1) * np.log(a_arr + 1) - np.where(am1 > 0, am1 * np.log(np.where(am1 > 0, am1, 1.0)), 0.0))
    h = h - math.log(2.0)
    h = EntropyUnit.coerce(unit).from_nats(h)
    return float(h) if np.ndim(h) == 0 else h


def gaussian_entropy(cov: np.ndarray, modes=None, unit=EntropyUnit.NATS) -> float:
    """Sum of single-mode entropies over the symplectic eigenvalues."""
    nu = symplectic_eigenvalues(cov, modes)
    if nu.size == 0:
        return 0.0
    return float(np.sum(gaussian_entropy_from_area(2 * nu, unit)))


@dataclass(frozen=True, eq=False)
class OhmicBathSpec:
    cutoff: float
    band_width: float
    gamma0: float
    m_s: float
    band_mass: float = 1.0
    frequencies: np.ndarray = field(default=None, repr=False)
    couplings_sq: np.ndarray = field(default=None, repr=False)

    @property
    def n_bands(self) -> int:
        return self.frequencies.size

    @property
    def couplings(self) -> np.ndarray:
        return np.sqrt(self.couplings_sq)

    @property
    def tau_rec(self) -> float:
        return 2 * math.pi / self.band_width


def discretize_ohmic_bath(cutoff: float, band_width: float, gamma0: float, m_s: float,
                          band_mass: float = 1.0) -> OhmicBathSpec:
    """Bands at midpoints of [0, cutoff] with dC^2 = (4 m_S M gamma0 / pi) w^2 dw."""
    if cutoff <= 0 or not 0 < band_width <= cutoff:
        raise ValueError("need cutoff > 0 and 0 < band_width <= cutoff")
    if gamma0 < 0 or m_s <= 0 or band_mass <= 0:
        raise ValueError("gamma0 must be >= 0 and masses positive")
    n = int(math.ceil(cutoff / band_width - 1e-9))
    w = (np.arange(n) + 0.5) * band_width
    c2 = 4 * m_s * band_mass * gamma0 / math.pi * w**2 * band_width
    return OhmicBathSpec(cutoff, band_width, gamma0, m_s, band_mass, w, c2)


@dataclass(frozen=True, eq=False)
class QBMModel:
    """System oscillator (m_s, omega0) squeezed by ``squeezing`` in ``quadrature``; bath in its ground state."""

    bath: OhmicBathSpec
    m_s: float = 1000.0
    omega0: float = 4.0
    squeezing: float = 1.0
    quadrature: str = "x"

    def __post_init__(self):
        if self.m_s <= 0 or self.omega0 <= 0 or self.squeezing <= 0:
            raise ValueError("mass, frequency and squeezing must be positive")
        if self.quadrature not in ("x", "p"):
            raise ValueError("quadrature must be 'x' or 'p'")
        if abs(self.bath.m_s - self.m_s) > 1e-12 * self.m_s:
            raise ValueError("bath couplings were built for a different system mass")
        renorm = float(np.sum(self.bath.couplings_sq / (self.bath.band_mass * self.bath.frequencies**2)))
        if self.m_s * self.omega0**2 <= renorm:
            raise ValueError("coupled Hamiltonian is not bounded below (frequency shift exceeds bare frequency)")

    @classmethod
    def fig7(cls, squeezing: float = 6.3e3, cutoff: float = 16.0, band_width: float = 0.1,
             gamma0: float = 1 / 40) -> "QBMModel":
        m_s = 1000.0
        return cls(discretize_ohmic_bath(cutoff, band_width, gamma0, m_s), m_s, 4.0, squeezing)

    @property
    def n_modes(self) -> int:
        return 1 + self.bath.n_bands

    @property
    def scale(self) -> np.ndarray:
        """Per-coordinate factors z_scaled = scale * z (x sqrt(m w), p / sqrt(m w))."""
        mw = np.r_[self.m_s * self.omega0, self.bath.band_mass * self.bath.frequencies]
        d = np.empty(2 * mw.size)
        d[0::2] = np.sqrt(mw)
        d[1::2] = 1 / np.sqrt(mw)
        return d

    def hamiltonian_matrix(self) -> np.ndarray:
        n = self.n_modes
        masses = np.r_[self.m_s, np.full(self.bath.n_bands, self.bath.band_mass)]
        freqs = np.r_[self.omega0, self.bath.frequencies]
        h = np.zeros((2 * n, 2 * n))
        h[0::2, 0::2][np.diag_indices(n)] = masses * freqs**2
        h[1::2, 1::2][np.diag_indices(n)] = 1 / masses
        h[0, 2::2] = h[2::2, 0] = self.bath.couplings
        return h

    def initial_state(self) -> GaussianState:
        d = self.scale
        cov_scaled = 0.5 * np.eye(2 * self.n_modes)
        s = self.squeezing
        cov_scaled[0, 0], cov_scaled[1, 1] = (0.5 / s, 0.5 * s) if self.quadrature == "x" else (0.5 * s, 0.5 / s)
        return GaussianState(np.zeros(2 * self.n_modes), cov_scaled / np.outer(d, d))

    def energy(self, state: GaussianState) -> float:
        h = self.hamiltonian_matrix()
        return float(0.5 * np.trace(h @ state.covariance) + 0.5 * state.mean @ h @ state.mean)


def symplectic_matrix(model: QBMModel, t: float, scaled: bool = False) -> np.ndarray:
    """S(t) = exp(t Omega Hm), computed in scaled coordinates for conditioning."""
    d = model.scale
    h_scaled = model.hamiltonian_matrix() / np.outer(d, d)
    s = expm(t * symplectic_form(model.n_modes) @ h_scaled)
    if not np.all(np.isfinite(s)):
        raise FloatingPointError("matrix exponential is not finite")
    return s if scaled else s * np.outer(1 / d, d)


def symplectic_drift(s: np.ndarray) -> float:
    om = symplectic_form(s.shape[0] // 2)
    return float(np.max(np.abs(s @ om @ s.T - om)))


def evolve_gaussian(model: QBMModel, state: GaussianState, t: float) -> GaussianState:
    if state.n_modes != model.n_modes:
        raise ValueError("state does not match the model's mode count")
    if t > model.bath.tau_rec / 2:
        warnings.warn(f"t = {t} exceeds half the recurrence time {model.bath.tau_rec:.4g}", RuntimeWarning,
                      stacklevel=2)
    s = symplectic_matrix(model, t)
    return GaussianState(s @ state.mean, s @ state.covariance @ s.T)


def qbm_state_at(model: QBMModel, t: float) -> GaussianState:
    return evolve_gaussian(model, model.initial_state(), t)


class GaussianProvider:
    """I(S:F) for fragments of bath bands of a pure global Gaussian state."""

    def __init__(self, model: QBMModel, state: GaussianState, descriptor=None):
        self.cov = _scale_cov(state.covariance, model.scale)
        self.n_env = model.bath.n_bands
        self.descriptor = descriptor or {"backend": "gaussian", "n_bands": self.n_env}
        self._h_s = gaussian_entropy(self.cov, [0], EntropyUnit.NATS)

    def _entropy(self, modes) -> float:
        modes = list(modes)
        if not modes:
            return 0.0
        total = self.n_env + 1
        if len(modes) > total - len(modes):  # pure global state: use the smaller side
            keep = set(modes)
            modes = [k for k in range(total) if k not in keep]
            if not modes:
                return 0.0
        return gaussian_entropy(self.cov, modes, EntropyUnit.NATS)

    def system_entropy(self, unit=EntropyUnit.NATS) -> float:
        return EntropyUnit.coerce(unit).from_nats(self._h_s)

    def entropy(self, modes, unit=EntropyUnit.NATS) -> float:
        return EntropyUnit.coerce(unit).from_nats(self._entropy(modes))

    def mutual_information(self, fragments, unit=EntropyUnit.NATS) -> np.ndarray:
        out = []
        for frag in fragments:
            if not len(frag):
                out.append(0.0)
                continue
            modes = [k + 1 for k in frag]
            out.append(self._h_s + self._entropy(modes) - self._entropy([0] + modes))
        return EntropyUnit.coerce(unit).from_nats(np.array(out))


def qbm_partial_information(model: QBMModel, t: float, fractions, samples_per_f: int = DEFAULT_SAMPLES,
                            seed: int = 0, unit=EntropyUnit.NATS) -> PIPCurve:
    state = qbm_state_at(model, t)
    desc = {"backend": "gaussian", "n_bands": model.bath.n_bands, "squeezing": model.squeezing, "t": t}
    return partial_information_plot(GaussianProvider(model, state, desc), fractions, samples_per_f, seed, unit)


def universal_pip(system_entropy: float, f):
    """Reference curve H_S + ln(f / (1 - f)) / 2 in nats."""
    f = np.asarray(f, dtype=float)
    return system_entropy + 0.5 * np.log(f / (1 - f))


def qbm_redundancy(model: QBMModel, t: float, delta: float, fractions=None, samples_per_f: int = 32,
                   seed: int = 0) -> RedundancyResult:
    """R_delta from the QBM PIP, with the s^(2 delta) estimate and the ratio R / s^(2 delta).

    By default every fragment size from 1 to N is sampled.
    """
    n = model.bath.n_bands
    if fractions is None:
        fractions = np.arange(1, n + 1) / n
    curve = qbm_partial_information(model, t, fractions, samples_per_f, seed, EntropyUnit.NATS)
    res = redundancy_from_pip(curve, delta)
    pred = model.squeezing ** (2 * delta)
    entropy_pred = math.exp(2 * delta * curve.system_entropy)
    return RedundancyResult(
        res.delta, res.f_delta, res.R_delta, res.interpolated, res.target, res.system_entropy,
        prediction=pred, ratio=res.R_delta / pred,
        diagnostic=f"exp(2 delta H_S) = {entropy_pred:.6g}",
    )
