"""Closed-form calculators: graviton emission, the slit condition, field fluctuations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .model import SI, DomainError, EnvironmentState, PhysicalConstants


@dataclass(frozen=True)
class EmissionResult:
    power: float  # W, equal to -dE/dt
    gamma_s: float  # 1/s
    half_life: float  # s

    def __post_init__(self):
        if self.power < 0:
            raise DomainError("emitted power must be non-negative")


def quadrupole_emission(m: float, a: float, omega: float,
                        constants: PhysicalConstants = SI) -> EmissionResult:
    """Power ``G m^2 a^4 w^6 / c^5`` and the single-graviton decay rate.

    ``gamma_s = power / (hbar w)``; with ``w = 0`` nothing is emitted, the rate
    is reported as 0 and the half-life is infinite.
    """
    if m < 0 or a < 0 or omega < 0:
        raise DomainError("m, a and omega must be non-negative")
    power = constants.G * m**2 * a**4 * omega**6 / constants.c**5
    if omega == 0 or power == 0:
        return EmissionResult(power, 0.0, math.inf)
    gamma_s = power / (constants.hbar * omega)
    return EmissionResult(power, gamma_s, math.log(2.0) / gamma_s)


def em_to_gravity(e_charge: float, a: float, m: float, constants: PhysicalConstants = SI) -> Tuple[float, float]:
    """Replace a dipole's charge by ``sqrt(G) m`` and its length by ``a^2``.

    ``e_charge`` is the quantity being replaced; it is accepted for symmetry
    with the electromagnetic formula and otherwise unused.
    """
    del e_charge
    return math.sqrt(constants.G) * m, a**2


def dipole_power(charge: float, length: float, omega: float, c: float = SI.c) -> float:
    """Dipole emission template ``q^2 d^2 w^4 / c^3`` (numerical prefactor dropped)."""
    return charge**2 * length**2 * omega**4 / c**3


@dataclass(frozen=True)
class BaymResult:
    lhs: float  # G m^2 d / r^2, J
    rhs: float  # h c / d, J
    satisfied: bool
    d_crit: float  # m


def baym_condition(m: float, r: float, d: float, constants: PhysicalConstants = SI) -> BaymResult:
    """Compare ``G m^2 d / r^2`` with one graviton energy ``h c / d``.

    Uses ``h``, not ``hbar``.  The estimate assumes ``d << r``; ``d >= r``
    only warns.
    """
    if not (m > 0 and r > 0 and d > 0):
        raise DomainError("m, r and d must be positive")
    if d >= r:
        warnings.warn(f"slit separation d = {d} is not small compared with r = {r}", stacklevel=2)
    lhs = constants.G * m**2 * d / r**2
    rhs = constants.h * constants.c / d
    d_crit = (r / m) * math.sqrt(constants.h * constants.c / constants.G)
    return BaymResult(lhs, rhs, lhs >= rhs, d_crit)


@dataclass(frozen=True)
class FluctuationResult:
    variance: float


def christoffel_fluctuation(coeffs: Sequence[complex], env: EnvironmentState) -> FluctuationResult:
    """Variance of ``sum_k c_k a_k + conj(c_k) a_k^dag`` in displaced thermal states.

    Coherent amplitudes drop out; each mode contributes ``|c_k|^2 (2 nbar_k + 1)``.
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if coeffs.shape != env.nbar.shape:
        raise DomainError(f"{coeffs.size} coefficients for {len(env)} modes")
    return FluctuationResult(float(np.sum(np.abs(coeffs) ** 2 * (2.0 * env.nbar + 1.0))))
