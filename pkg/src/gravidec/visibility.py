"""Interferometric visibility from branch-conditioned field displacements.

The off-diagonal element of the two-branch system is the overlap
``<E1|E2>`` of the two conditional field states.  For a product of
(displaced) thermal mode states it factorises over modes; each mode
contributes the complex log

    -(2 nbar + 1) |delta|^2 / 2
    + i (Phi1 - Phi2 - Im(beta1 conj(beta2)) + 2 Im(delta conj(alpha)))

with ``delta = beta2 - beta1``.  The thermal factor is the exact average
over the Gaussian P-function of the thermal state.  Grid weights multiply
the per-mode logs, which is how a discretised continuum enters.

Only the coherence factor is computed here.  Branch populations are
constants of the model and never appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .dynamics import PulseSequence, accumulate, swapped_profiles
from .model import (SI, CouplingProfile, DomainError, EnvironmentState, ModeGrid,
                    PhysicalConstants, PlanckScales, SpectralDensity, build_mode_grid,
                    planck_scales)


@dataclass(frozen=True)
class VisibilityResult:
    magnitude: float
    phase: float

    @property
    def value(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))


def mode_log_coherence(grid: ModeGrid, profiles: Tuple[CouplingProfile, CouplingProfile],
                       env: Optional[EnvironmentState], T: float,
                       seq: Optional[PulseSequence] = None,
                       restore_environment: bool = False) -> np.ndarray:
    """Per-mode complex log of ``<E1(T)|E2(T)>`` (unweighted)."""
    if env is None:
        env = EnvironmentState.vacuum(len(grid))
    if len(env) != len(grid):
        raise DomainError(f"environment has {len(env)} modes, grid has {len(grid)}")
    if T < 0:
        raise DomainError(f"T must be non-negative, got {T}")
    if seq is None:
        seq = PulseSequence.free(T)
    elif seq.total_time != T:
        raise DomainError("pulse sequence duration differs from T")
    p1, p2 = swapped_profiles(profiles[0], profiles[1], seq)
    omegas, gs = grid.omegas, grid.couplings
    beta1, phi1 = accumulate(p1.clipped(T), omegas, gs)
    beta2, phi2 = accumulate(p2.clipped(T), omegas, gs)
    if restore_environment:
        # Branch-conditioned D(-beta_b) on the field leaves only exp(-i Phi_b).
        return 1j * (phi1 - phi2)
    delta = beta2 - beta1
    decay = -(2.0 * env.nbar + 1.0) * 0.5 * np.abs(delta) ** 2
    phase = phi1 - phi2 - np.imag(beta1 * np.conj(beta2)) + 2.0 * np.imag(delta * np.conj(env.alpha))
    return decay + 1j * phase


def visibility(grid: ModeGrid, profiles: Tuple[CouplingProfile, CouplingProfile],
               env: Optional[EnvironmentState] = None, seq: Optional[PulseSequence] = None,
               T: Optional[float] = None, restore_environment: bool = False) -> VisibilityResult:
    """Coherence factor of the two-branch superposition after time ``T``.

    ``T`` defaults to the pulse sequence duration, or to the shorter profile.
    With ``restore_environment`` the field is displaced back, branch by branch,
    before readout (the closed-loop protocol); only dynamical phases remain.
    The returned phase is not wrapped.
    """
    if T is None:
        T = seq.total_time if seq is not None else min(p.duration for p in profiles)
    logs = mode_log_coherence(grid, profiles, env, T, seq, restore_environment)
    total = np.sum(grid.weights * logs)
    return VisibilityResult(float(np.exp(total.real)), float(total.imag))


def decoherence_exponent(grid, profiles, env=None, seq=None, T=None) -> float:
    """``-log |visibility|``; avoids underflow of the magnitude."""
    if T is None:
        T = seq.total_time if seq is not None else min(p.duration for p in profiles)
    logs = mode_log_coherence(grid, profiles, env, T, seq)
    return float(-np.sum(grid.weights * logs.real))


KERNELS = {
    # |beta|^2 w^2 / g^2 for constant coupling: exact consequence of the shift.
    "exact": lambda x: 4.0 * np.sin(0.5 * x) ** 2,
    # sin^2(w T) kernel, as the rate integral is usually printed.
    "sin2": lambda x: np.sin(x) ** 2,
}


@dataclass(frozen=True)
class RateEstimate:
    gamma: float
    convention_tag: str

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"rate must be non-negative, got {self.gamma}")


def rate_from_grid(grid: ModeGrid, T: float, kernel: str = "exact") -> RateEstimate:
    """``(1/T) sum_k w_k g_k^2 K(w_k T) / w_k^2`` on an explicit grid."""
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    try:
        K = KERNELS[kernel]
    except KeyError:
        raise DomainError(f"unknown kernel convention {kernel!r}; choose from {sorted(KERNELS)}") from None
    w = grid.omegas
    gamma = np.sum(grid.weights * grid.couplings**2 * K(w * T) / w**2) / T
    return RateEstimate(float(gamma), kernel)


def rate_integral(sd: SpectralDensity, T: float, kernel: str = "exact", n_modes: int = 512) -> RateEstimate:
    """Mode-summed decoherence rate for a continuum spectral density."""
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    return rate_from_grid(build_mode_grid(sd, n_modes), T, kernel)


@dataclass(frozen=True)
class DimensionalParams:
    delta_E: float
    delta_x: float
    theta: float
    Omega: float
    n: int = 1

    def __post_init__(self):
        for name in ("delta_E", "delta_x", "theta", "Omega"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")


def _power_law_rate(delta_E, delta_x, Omega, n, frequency, scales, constants) -> float:
    return (delta_E / scales.E_P) ** 2 * (delta_x / constants.c * Omega) ** n * frequency


def dimensional_rate(p: DimensionalParams, scales: Optional[PlanckScales] = None,
                     constants: PhysicalConstants = SI) -> RateEstimate:
    """``(dE/E_P)^2 (dx/c)^n (k_B theta / hbar) Omega^n``."""
    scales = scales or planck_scales(constants)
    thermal = constants.k_B * p.theta / constants.hbar
    return RateEstimate(_power_law_rate(p.delta_E, p.delta_x, p.Omega, p.n, thermal, scales, constants),
                        "dimensional")


def penrose_rate(m: float, delta_x: float, Omega: float, n: int = 1,
                 scales: Optional[PlanckScales] = None, constants: PhysicalConstants = SI) -> RateEstimate:
    """Zero-temperature limit: thermal frequency replaced by ``Omega``, ``dE = m c^2``."""
    if not (m > 0 and delta_x > 0 and Omega > 0):
        raise DomainError("m, delta_x and Omega must be positive")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    scales = scales or planck_scales(constants)
    delta_E = m * constants.c**2
    return RateEstimate(_power_law_rate(delta_E, delta_x, Omega, n, Omega, scales, constants), "penrose")
