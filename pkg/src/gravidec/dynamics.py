"""Coherent-state displacement of field modes under branch-conditioned coupling.

Each mode evolves under ``H(t) = g(t) (a e^{i w t} + a^dag e^{-i w t})``
(interaction picture).  Because the commutator of ``H`` at two times is a
c-number, the propagator over ``[0, t]`` is exactly ``exp(-i Phi) D(beta)``
with

* ``beta = -i int g(s) e^{-i w s} ds``, the coherent-amplitude shift, and
* ``Phi = int_0^t ds1 int_0^s1 ds2 g(s1) g(s2) sin(w (s1 - s2))``.

For piecewise-constant ``g`` both are accumulated segment by segment using
``D(a) D(b) = exp(i Im(a conj(b))) D(a + b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .model import CouplingProfile, DomainError, Segment

# Below |w dt| of this size the closed forms lose digits to cancellation.
SERIES_THRESHOLD = 1e-8
PHASE_SERIES_THRESHOLD = 1e-2


@dataclass(frozen=True)
class PulseSequence:
    """Branch swaps at ``swap_times`` during a run of length ``total_time``."""

    swap_times: Tuple[float, ...]
    total_time: float

    def __post_init__(self):
        times = tuple(float(t) for t in self.swap_times)
        object.__setattr__(self, "swap_times", times)
        if self.total_time < 0:
            raise DomainError("total time must be non-negative")
        bounds = (0.0,) + times + (float(self.total_time),)
        if any(not a < b for a, b in zip(bounds, bounds[1:])) and times:
            raise DomainError(f"swap times must satisfy 0 < t1 < ... < tn < T, got {times}")

    @classmethod
    def free(cls, T: float) -> "PulseSequence":
        return cls((), T)

    @classmethod
    def echo(cls, T: float) -> "PulseSequence":
        return cls((0.5 * T,), T) if T > 0 else cls((), T)


def _rotating_integral(omega, a, b):
    """``(e^{-i w b} - e^{-i w a}) / w`` with a series near ``w (b - a) = 0``."""
    omega = np.asarray(omega, dtype=float)
    dt = b - a
    x = omega * dt
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.expm1(-1j * x) / omega
    series = -1j * dt - 0.5 * omega * dt**2
    return np.exp(-1j * omega * a) * np.where(np.abs(x) < SERIES_THRESHOLD, series, exact)


def _self_phase(g, omega, dt):
    """``g^2 (dt / w - sin(w dt) / w^2)`` for constant coupling over ``dt``."""
    omega = np.asarray(omega, dtype=float)
    x = omega * dt
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (x - np.sin(x)) / omega**2
    series = dt**2 * x * (1.0 / 6.0 - x**2 / 120.0 + x**4 / 5040.0)
    return g**2 * np.where(np.abs(x) < PHASE_SERIES_THRESHOLD, series, exact)


def accumulate(segments: Sequence[Segment], omega, g_mode=1.0):
    """Shift ``beta`` and dynamical phase ``Phi`` after the given segments.

    ``omega`` and ``g_mode`` may be arrays (one entry per mode); segment
    strengths multiply ``g_mode``.
    """
    omega = np.asarray(omega, dtype=float)
    g_mode = np.asarray(g_mode, dtype=float)
    shape = np.broadcast(omega, g_mode).shape
    beta = np.zeros(shape, complex)
    phi = np.zeros(shape)
    for seg in segments:
        g = seg.g * g_mode
        if np.all(g == 0):
            continue
        step = g * _rotating_integral(omega, seg.t_start, seg.t_end)
        phi = phi + _self_phase(g, omega, seg.t_end - seg.t_start) - np.imag(step * np.conj(beta))
        beta = beta + step
    return beta, phi


def displacement_free(g: float, omega: float, T: float) -> complex:
    """Shift ``(g/w)(e^{-i w T} - 1)`` for constant coupling over ``[0, T]``."""
    if omega == 0:
        raise DomainError("omega = 0; use displacement_profile for the static limit")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if T < 0:
        raise DomainError(f"T must be non-negative, got {T}")
    return complex(g * np.expm1(-1j * omega * T) / omega)


def displacement_sequenced(g: float, omega: float, seq: PulseSequence) -> complex:
    """Shift with the coupling sign flipped at each swap time."""
    times = (0.0,) + seq.swap_times + (seq.total_time,)
    if seq.total_time == 0:
        return 0j
    signs = [(-1.0) ** j for j in range(len(times) - 1)]
    beta, _ = accumulate(CouplingProfile.from_breakpoints(times, signs).segments, omega, g)
    return complex(beta)


def displacement_profile(profile: CouplingProfile, omega: float, t: float, g_mode: float = 1.0) -> complex:
    """Shift after time ``t`` under a piecewise-constant profile."""
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    beta, _ = accumulate(profile.clipped(t), omega, g_mode)
    return complex(beta)


def overlap(beta: complex, gamma: complex) -> complex:
    """Glauber inner product ``<beta|gamma>``.

    ``exp(-|b|^2/2 - |c|^2/2 + conj(b) c)`` rewritten as
    ``exp(-|b - c|^2/2 + i Im(conj(b) c))`` so the magnitude never exceeds 1.
    """
    beta, gamma = complex(beta), complex(gamma)
    return complex(np.exp(-0.5 * abs(beta - gamma) ** 2 + 1j * (beta.conjugate() * gamma).imag))


def swapped_profiles(p1: CouplingProfile, p2: CouplingProfile, seq: PulseSequence):
    """Effective branch profiles when the branches are swapped at each pulse.

    After an odd number of swaps the system component that started in branch 1
    sits where branch 2 couples, and vice versa.
    """
    T = seq.total_time
    if p1.duration < T or p2.duration < T:
        raise DomainError(f"profiles cover [0, {min(p1.duration, p2.duration)}], need [0, {T}]")
    if T == 0:
        return p1, p2
    cuts = np.unique(np.concatenate([p1.breakpoints(), p2.breakpoints(), seq.swap_times, [0.0, T]]))
    cuts = cuts[cuts <= T]
    swaps = np.asarray(seq.swap_times)
    eff1, eff2 = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        odd = int(np.sum(swaps <= a)) % 2 == 1
        v1, v2 = p1.value_at(a), p2.value_at(a)
        if odd:
            v1, v2 = v2, v1
        eff1.append(Segment(float(a), float(b), v1))
        eff2.append(Segment(float(a), float(b), v2))
    return CouplingProfile(tuple(eff1)), CouplingProfile(tuple(eff2))
