"""Brute-force check of the analytic engine in a truncated Fock basis.

Every mode of each branch is time-stepped in its own truncated Hilbert space
(modes never couple).  The step is the fourth-order Magnus integrator with
two Gauss points: the first term is a linear combination of ``a`` and
``a^dag``, which is a rotated copy of ``x = a + a^dag`` and is exponentiated
through one eigendecomposition of the truncated ``x``; the commutator term
is a c-number phase.  Nothing here uses the closed-form displacements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import pdtrc

from .dynamics import PulseSequence, swapped_profiles
from .model import CouplingProfile, DomainError, EnvironmentState, ModeGrid
from .visibility import visibility

MAX_DIMENSION = 10**6
RELIABLE_TAIL = 1e-8


@dataclass(frozen=True)
class FockConfig:
    n_modes: int = 1
    cutoff: int = 64
    dt: float = 1e-2
    initial: Optional[EnvironmentState] = None

    def __post_init__(self):
        if not 1 <= self.n_modes <= 3:
            raise DomainError(f"oracle supports 1 to 3 modes, got {self.n_modes}")
        if self.cutoff < 1:
            raise DomainError("cutoff must be >= 1")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if (self.cutoff + 1) ** self.n_modes > MAX_DIMENSION:
            raise DomainError("total Hilbert-space dimension exceeds 1e6")
        if self.initial is not None:
            if len(self.initial) != self.n_modes:
                raise DomainError("initial state length differs from n_modes")
            if np.any(self.initial.nbar > 0):
                raise DomainError("oracle evolves pure states; sample thermal states instead")


@dataclass(frozen=True)
class OracleResult:
    times: np.ndarray
    coherence: np.ndarray  # (n_times,) or (n_times, n_samples)
    norm_drift: float
    truncation_tail: float

    @property
    def reliable(self) -> bool:
        return self.truncation_tail <= RELIABLE_TAIL


def truncation_bound(alpha_max: float, cutoff: int) -> float:
    """Poisson mass of a coherent state beyond ``cutoff`` excitations."""
    if alpha_max < 0:
        raise DomainError("alpha_max must be non-negative")
    if alpha_max == 0:
        return 0.0
    return float(pdtrc(cutoff, alpha_max**2))


def coherent_vector(alpha, cutoff: int) -> np.ndarray:
    """Fock amplitudes of ``|alpha>``, one column per entry of ``alpha``."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    out = np.empty((cutoff + 1, alpha.size), complex)
    out[0] = np.exp(-0.5 * np.abs(alpha) ** 2)
    for n in range(1, cutoff + 1):
        out[n] = out[n - 1] * alpha / math.sqrt(n)
    return out


class _TruncatedMode:
    def __init__(self, cutoff: int):
        self.n = np.arange(cutoff + 1)
        off = np.sqrt(np.arange(1, cutoff + 1))
        x = np.diag(off, 1) + np.diag(off, -1)
        self.eigvals, self.eigvecs = np.linalg.eigh(x)
        self.sqrt_n = off

    def step(self, psi, omega, g, t0, h):
        """Advance ``psi`` (columns) over ``[t0, t0 + h]`` with constant ``g``."""
        if g == 0:
            return psi
        c = math.sqrt(3.0) / 6.0
        t1, t2 = t0 + (0.5 - c) * h, t0 + (0.5 + c) * h
        u = 0.5 * h * g * (np.exp(1j * omega * t1) + np.exp(1j * omega * t2))
        r, theta = abs(u), np.angle(u)
        rot = np.exp(1j * theta * self.n)[:, None]
        psi = self.eigvecs.conj().T @ (rot * psi)
        psi = self.eigvecs @ (np.exp(-1j * r * self.eigvals)[:, None] * psi)
        psi = psi / rot
        commutator_phase = (math.sqrt(3.0) / 6.0) * h**2 * g * g * math.sin(omega * (t2 - t1))
        return psi * np.exp(-1j * commutator_phase)

    def mean_a(self, psi):
        return np.sum(np.conj(psi[:-1]) * self.sqrt_n[:, None] * psi[1:], axis=0)


def _time_nodes(profiles, T, times, dt):
    cuts = np.unique(np.concatenate([profiles[0].breakpoints(), profiles[1].breakpoints(),
                                     np.asarray(times, float), [0.0, T]]))
    cuts = cuts[cuts <= T]
    steps = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        k = max(1, int(math.ceil((b - a) / dt - 1e-9)))
        edges = np.linspace(a, b, k + 1)
        steps.extend(zip(edges[:-1], np.diff(edges)))
    return steps


def evolve_truncated(cfg: FockConfig, grid: ModeGrid, profiles: Tuple[CouplingProfile, CouplingProfile],
                     T: float, seq: Optional[PulseSequence] = None,
                     times: Optional[Sequence[float]] = None,
                     alphas: Optional[np.ndarray] = None) -> OracleResult:
    """Evolve both branch field states and report ``<E1(t)|E2(t)>``.

    ``times`` are output times in ``[0, T]`` (default ``[T]``).  ``alphas``
    of shape ``(n_samples, n_modes)`` evolves several initial coherent
    states at once; otherwise ``cfg.initial`` (or vacuum) is used.
    """
    if len(grid) != cfg.n_modes:
        raise DomainError(f"grid has {len(grid)} modes, config says {cfg.n_modes}")
    if np.any(grid.weights != 1.0):
        raise DomainError("the oracle evolves discrete modes; grid weights must be 1")
    seq = seq if seq is not None else PulseSequence.free(T)
    if seq.total_time != T:
        raise DomainError("pulse sequence duration differs from T")
    eff = swapped_profiles(profiles[0], profiles[1], seq)
    times = np.asarray([T] if times is None else times, dtype=float)
    if np.any(times < 0) or np.any(times > T) or np.any(np.diff(times) < 0):
        raise DomainError("output times must be increasing and within [0, T]")

    sampled = alphas is not None
    if alphas is None:
        alpha0 = cfg.initial.alpha if cfg.initial is not None else np.zeros(cfg.n_modes, complex)
        alphas = alpha0[None, :]
    alphas = np.asarray(alphas, dtype=complex)
    if alphas.ndim != 2 or alphas.shape[1] != cfg.n_modes:
        raise DomainError("alphas must have shape (n_samples, n_modes)")

    mode = _TruncatedMode(cfg.cutoff)
    steps = _time_nodes(eff, T, times, cfg.dt)
    coherence = np.ones((len(times), alphas.shape[0]), complex)
    norm_drift = 0.0
    alpha_max = float(np.max(np.abs(alphas)))
    for k, (omega, g_mode) in enumerate(zip(grid.omegas, grid.couplings)):
        psi = [coherent_vector(alphas[:, k], cfg.cutoff) for _ in range(2)]
        out = iter(range(len(times)))
        idx = next(out)
        while idx is not None and times[idx] == 0.0:
            coherence[idx] *= np.sum(np.conj(psi[0]) * psi[1], axis=0)
            idx = next(out, None)
        for t0, h in steps:
            t = t0 + h
            for b in range(2):
                psi[b] = mode.step(psi[b], omega, g_mode * eff[b].value_at(t0 + 0.5 * h), t0, h)
                alpha_max = max(alpha_max, float(np.max(np.abs(mode.mean_a(psi[b])))))
            while idx is not None and math.isclose(times[idx], t, rel_tol=0, abs_tol=1e-12 * max(1.0, T)):
                coherence[idx] *= np.sum(np.conj(psi[0]) * psi[1], axis=0)
                idx = next(out, None)
        for b in range(2):
            norm = np.sum(np.abs(psi[b]) ** 2, axis=0)
            norm_drift = max(norm_drift, float(np.max(np.abs(1.0 - norm))))
    tail = truncation_bound(alpha_max, cfg.cutoff)
    coherence = coherence if sampled else coherence[:, 0]
    return OracleResult(times, coherence, norm_drift, tail)


def sample_thermal_alphas(env: EnvironmentState, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draws from the Gaussian P-function of displaced thermal states."""
    scale = np.sqrt(env.nbar / 2.0)
    noise = rng.standard_normal((n_samples, len(env))) + 1j * rng.standard_normal((n_samples, len(env)))
    return env.alpha[None, :] + scale[None, :] * noise


@dataclass(frozen=True)
class ThermalEstimate:
    mean: complex
    standard_error: float
    n_samples: int


def thermal_oracle(cfg: FockConfig, grid: ModeGrid, profiles, T: float, env: EnvironmentState,
                   n_samples: int = 1000, seed: int = 0, seq: Optional[PulseSequence] = None) -> ThermalEstimate:
    """Monte-Carlo P-function average of oracle coherences at time ``T``."""
    if n_samples < 2:
        raise DomainError("need at least two samples for an error estimate")
    alphas = sample_thermal_alphas(env, n_samples, np.random.default_rng(seed))
    pure = FockConfig(cfg.n_modes, cfg.cutoff, cfg.dt)
    result = evolve_truncated(pure, grid, profiles, T, seq=seq, alphas=alphas)
    if not result.reliable:
        raise DomainError(f"truncation tail {result.truncation_tail:.2e} too large; raise cutoff")
    samples = result.coherence[-1]
    mean = complex(np.mean(samples))
    # Standard error of the complex mean, per component; report the larger.
    se = max(np.std(samples.real, ddof=1), np.std(samples.imag, ddof=1)) / math.sqrt(n_samples)
    return ThermalEstimate(mean, float(se), n_samples)


@dataclass(frozen=True)
class OracleCase:
    """One oracle-vs-analytic comparison point."""

    grid: ModeGrid
    profiles: Tuple[CouplingProfile, CouplingProfile]
    T: float
    alpha: np.ndarray
    echo: bool = False
    label: str = ""


def random_case(rng: np.random.Generator, n_modes: int, label: str = "") -> OracleCase:
    """Random piecewise couplings, frequencies, amplitudes and optional echo."""
    T = float(rng.uniform(0.5, 6.0))
    omegas = np.sort(rng.uniform(0.3, 2.5, n_modes))
    while np.any(np.diff(omegas) <= 1e-3):
        omegas = np.sort(rng.uniform(0.3, 2.5, n_modes))
    gs = rng.uniform(-1.0, 1.0, n_modes)
    profiles = []
    for _ in range(2):
        n_seg = int(rng.integers(1, 4))
        inner = np.sort(rng.uniform(0.0, T, n_seg - 1))
        profiles.append(CouplingProfile.from_breakpoints([0.0, *inner, T], rng.uniform(-1.0, 1.0, n_seg)))
    alpha = rng.uniform(-0.5, 0.5, n_modes) + 1j * rng.uniform(-0.5, 0.5, n_modes)
    return OracleCase(ModeGrid.from_arrays(omegas, gs), tuple(profiles), T, alpha,
                      echo=bool(rng.integers(2)), label=label)


COMPARISON_COLUMNS = ("case", "n_modes", "T", "echo", "oracle_re", "oracle_im", "analytic_re",
                      "analytic_im", "abs_error", "norm_drift", "truncation_tail")


def compare_case(case: OracleCase, cutoff: int = 64, dt: float = 1e-2) -> dict:
    env = EnvironmentState(case.alpha, np.zeros(len(case.grid)))
    seq = PulseSequence.echo(case.T) if case.echo else PulseSequence.free(case.T)
    analytic = visibility(case.grid, case.profiles, env, seq, case.T).value
    cfg = FockConfig(len(case.grid), cutoff, dt, env)
    res = evolve_truncated(cfg, case.grid, case.profiles, case.T, seq=seq)
    oracle = complex(res.coherence[-1])
    return {
        "case": case.label, "n_modes": len(case.grid), "T": case.T, "echo": int(case.echo),
        "oracle_re": oracle.real, "oracle_im": oracle.imag,
        "analytic_re": analytic.real, "analytic_im": analytic.imag,
        "abs_error": abs(oracle - analytic), "norm_drift": res.norm_drift,
        "truncation_tail": res.truncation_tail,
    }
