"""Shared vocabulary: constants, Planck scales, field modes and couplings.

Units follow SI unless a caller chooses otherwise.  Couplings are stored in
angular-frequency units (the Hamiltonian coupling divided by hbar), which
keeps coherent-state displacements dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .config import ConfigError, as_float, check_known, load_config


class DomainError(ValueError):
    """Input outside the domain of an operation."""


# CODATA 2018 recommended values (G is measured; hbar, c, k_B are exact SI).
CODATA_2018 = {
    "G": 6.67430e-11,  # m^3 kg^-1 s^-2
    "hbar": 1.054571817e-34,  # J s
    "c": 299792458.0,  # m s^-1
    "k_B": 1.380649e-23,  # J K^-1
}


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = CODATA_2018["G"]
    hbar: float = CODATA_2018["hbar"]
    c: float = CODATA_2018["c"]
    k_B: float = CODATA_2018["k_B"]

    def __post_init__(self):
        for name in ("G", "hbar", "c", "k_B"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"constant {name} must be positive and finite, got {value}")

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @classmethod
    def natural(cls) -> "PhysicalConstants":
        return cls(G=1.0, hbar=1.0, c=1.0, k_B=1.0)


SI = PhysicalConstants()


@dataclass(frozen=True)
class PlanckScales:
    m_P: float
    E_P: float
    l_P: float


def planck_scales(constants: PhysicalConstants = SI) -> PlanckScales:
    """Planck mass, energy and length for the given constants."""
    for name in ("G", "hbar", "c"):
        if not getattr(constants, name) > 0:
            raise DomainError(f"constant {name} must be positive")
    m_P = math.sqrt(constants.hbar * constants.c / constants.G)
    return PlanckScales(
        m_P=m_P,
        E_P=m_P * constants.c**2,
        l_P=math.sqrt(constants.hbar * constants.G / constants.c**3),
    )


def quadrupole_coupling(V_pot: float, x: float, quant_volume: float, omega: float,
                        constants: PhysicalConstants = SI) -> float:
    """Matter-field coupling of one graviton mode, in rad/s.

    Evaluates ``V x^2 sqrt(16 pi G hbar) / (4 c^3 sqrt(vol)) * omega^(3/2)``
    and divides by hbar.  The bookkeeping of ``V``, ``x`` and ``vol`` is taken
    as written; only ratios of couplings enter downstream results.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if not quant_volume > 0:
        raise DomainError(f"quantization volume must be positive, got {quant_volume}")
    G, hbar, c = constants.G, constants.hbar, constants.c
    g = V_pot * x**2 * math.sqrt(16.0 * math.pi * G * hbar) / (4.0 * c**3 * math.sqrt(quant_volume))
    return g * omega**1.5 / hbar


@dataclass(frozen=True)
class Mode:
    omega: float
    g: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"mode frequency must be positive, got {self.omega}")
        if not self.weight >= 0:
            raise DomainError(f"mode weight must be non-negative, got {self.weight}")


@dataclass(frozen=True)
class ModeGrid:
    """Ordered set of field modes; a discretised ``int dk rho(k)``."""

    modes: Tuple[Mode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise DomainError("mode grid must be nonempty")
        omegas = self.omegas
        if np.any(np.diff(omegas) <= 0):
            raise DomainError("mode frequencies must be strictly increasing")

    @classmethod
    def from_arrays(cls, omegas, gs, weights=None) -> "ModeGrid":
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        gs = np.broadcast_to(np.asarray(gs, dtype=float), omegas.shape)
        weights = np.ones_like(omegas) if weights is None else np.broadcast_to(
            np.asarray(weights, dtype=float), omegas.shape)
        return cls(tuple(Mode(float(w), float(g), float(q)) for w, g, q in zip(omegas, gs, weights)))

    @classmethod
    def single(cls, omega: float, g: float = 1.0) -> "ModeGrid":
        return cls((Mode(omega, g, 1.0),))

    def __len__(self):
        return len(self.modes)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def couplings(self) -> np.ndarray:
        return np.array([m.g for m in self.modes])

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.modes])

    def split(self, index: int) -> Tuple["ModeGrid", "ModeGrid"]:
        return ModeGrid(self.modes[:index]), ModeGrid(self.modes[index:])


@dataclass(frozen=True)
class SpectralDensity:
    """Power-law coupling ``g(w) = prefactor * w**exponent`` on ``(0, cutoff]``.

    The mode measure is ``dk rho(k)`` with linear dispersion ``w = speed * k``
    and ``rho(k) = k**dos_exponent``.  ``speed`` defaults to 1 so that grids
    can be built in dimensionless units; pass ``c`` for SI wavenumbers.
    """

    prefactor: float = 1.0
    exponent: float = 1.5
    cutoff: float = 1.0
    dos_exponent: float = 2.0
    speed: float = 1.0

    def __post_init__(self):
        if not self.cutoff > 0:
            raise DomainError(f"cutoff must be positive, got {self.cutoff}")
        if not self.speed > 0:
            raise DomainError(f"dispersion speed must be positive, got {self.speed}")

    def coupling(self, omega):
        return self.prefactor * np.asarray(omega, dtype=float) ** self.exponent

    def density(self, omega):
        """``rho(k(omega)) / speed``, the Jacobian of ``dk`` into ``d omega``."""
        k = np.asarray(omega, dtype=float) / self.speed
        return k**self.dos_exponent / self.speed

    def scaled(self, factor: float) -> "SpectralDensity":
        return SpectralDensity(self.prefactor * factor, self.exponent, self.cutoff,
                               self.dos_exponent, self.speed)


MAX_PANEL_ORDER = 16


def gauss_legendre_panels(lower: float, upper: float, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights with exactly ``n_nodes`` points.

    Equal-width panels carry at most ``MAX_PANEL_ORDER`` nodes each; node
    counts differ by at most one between panels.
    """
    if n_nodes < 1:
        raise DomainError("need at least one quadrature node")
    n_panels = -(-n_nodes // MAX_PANEL_ORDER)
    base, extra = divmod(n_nodes, n_panels)
    edges = np.linspace(lower, upper, n_panels + 1)
    nodes, weights = [], []
    for i in range(n_panels):
        x, w = np.polynomial.legendre.leggauss(base + (1 if i < extra else 0))
        a, b = edges[i], edges[i + 1]
        nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def quadrature_degree(n_nodes: int) -> int:
    """Polynomial degree integrated exactly by ``gauss_legendre_panels``."""
    n_panels = -(-n_nodes // MAX_PANEL_ORDER)
    return 2 * (n_nodes // n_panels) - 1


def build_mode_grid(sd: SpectralDensity, n_modes: int) -> ModeGrid:
    """Discretise the field on ``(0, cutoff]``.

    ``sum(weight * f(omega))`` approximates ``int dk rho(k) f(omega(k))``.
    """
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    omegas, qw = gauss_legendre_panels(0.0, sd.cutoff, n_modes)
    return ModeGrid.from_arrays(omegas, sd.coupling(omegas), qw * sd.density(omegas))


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    g: float


@dataclass(frozen=True)
class CouplingProfile:
    """Piecewise-constant coupling of one branch, covering ``[0, T]``.

    Segment strengths are dimensionless factors applied to each mode's own
    coupling ``Mode.g``, so one profile can drive a whole grid.
    """

    segments: Tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*map(float, s)) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise DomainError("coupling profile needs at least one segment")
        if segs[0].t_start != 0.0:
            raise DomainError("coupling profile must start at t = 0")
        for prev, seg in zip(segs, segs[1:]):
            if seg.t_start != prev.t_end:
                raise DomainError("coupling profile segments must be contiguous")
        for seg in segs:
            if not seg.t_start < seg.t_end:
                raise DomainError(f"empty or reversed segment {seg}")

    @classmethod
    def constant(cls, g: float, T: float) -> "CouplingProfile":
        return cls((Segment(0.0, T, g),))

    @classmethod
    def from_breakpoints(cls, times: Sequence[float], values: Sequence[float]) -> "CouplingProfile":
        """``times`` has one more entry than ``values`` and starts at 0."""
        if len(times) != len(values) + 1:
            raise DomainError("need len(times) == len(values) + 1")
        return cls(tuple(Segment(float(a), float(b), float(g))
                         for a, b, g in zip(times[:-1], times[1:], values)))

    @property
    def duration(self) -> float:
        return self.segments[-1].t_end

    def breakpoints(self) -> np.ndarray:
        return np.array([s.t_start for s in self.segments] + [self.duration])

    def value_at(self, t: float) -> float:
        for seg in self.segments:
            if seg.t_start <= t < seg.t_end:
                return seg.g
        if t == self.duration:
            return self.segments[-1].g
        raise DomainError(f"t = {t} outside profile coverage [0, {self.duration}]")

    def clipped(self, t: float) -> Tuple[Segment, ...]:
        """Segments restricted to ``[0, t]``."""
        if not 0.0 <= t <= self.duration:
            raise DomainError(f"t = {t} outside profile coverage [0, {self.duration}]")
        out = []
        for seg in self.segments:
            if seg.t_start >= t:
                break
            out.append(Segment(seg.t_start, min(seg.t_end, t), seg.g))
        return tuple(out)

    def to_config(self) -> str:
        return "; ".join(f"{s.t_start!r}:{s.t_end!r}:{s.g!r}" for s in self.segments)

    @classmethod
    def from_config(cls, text: str) -> "CouplingProfile":
        segs = []
        for chunk in text.split(";"):
            parts = chunk.strip().split(":")
            if len(parts) != 3:
                raise ConfigError(f"bad profile segment {chunk!r}; expected t_start:t_end:g")
            segs.append(Segment(*(float(p) for p in parts)))
        return cls(tuple(segs))


def sequential_profiles(T: float, g: float = 1.0) -> Tuple[CouplingProfile, CouplingProfile]:
    """Branch 1 couples on ``[0, T/2]``, branch 2 on ``[T/2, T]``."""
    half = 0.5 * T
    return (CouplingProfile.from_breakpoints([0.0, half, T], [g, 0.0]),
            CouplingProfile.from_breakpoints([0.0, half, T], [0.0, g]))


def symmetric_profiles(T: float, g: float = 1.0) -> Tuple[CouplingProfile, CouplingProfile]:
    return CouplingProfile.constant(g, T), CouplingProfile.constant(-g, T)


@dataclass(frozen=True)
class EnvironmentState:
    """Per-mode coherent amplitude and thermal occupation."""

    alpha: np.ndarray = field(default_factory=lambda: np.zeros(1, complex))
    nbar: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=complex))
        nbar = np.atleast_1d(np.asarray(self.nbar, dtype=float))
        if alpha.shape != nbar.shape:
            raise DomainError("alpha and nbar must have the same length")
        if np.any(nbar < 0):
            raise DomainError("thermal occupations must be non-negative")
        alpha.setflags(write=False)
        nbar.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "nbar", nbar)

    @classmethod
    def vacuum(cls, n_modes: int) -> "EnvironmentState":
        return cls(np.zeros(n_modes, complex), np.zeros(n_modes))

    @classmethod
    def thermal(cls, n_modes: int, nbar: Union[float, Iterable[float]]) -> "EnvironmentState":
        return cls(np.zeros(n_modes, complex), np.broadcast_to(np.asarray(nbar, float), (n_modes,)).copy())

    def __len__(self):
        return len(self.alpha)


def bose_occupation(omega, temperature: float, constants: PhysicalConstants = SI) -> np.ndarray:
    """Mean thermal occupation ``1 / (exp(hbar w / k_B T) - 1)``."""
    omega = np.asarray(omega, dtype=float)
    if temperature <= 0:
        return np.zeros_like(omega)
    return 1.0 / np.expm1(constants.hbar * omega / (constants.k_B * temperature))


CONSTANT_KEYS = ("G", "hbar", "c", "k_B")
SPECTRAL_KEYS = ("prefactor", "exponent", "cutoff", "dos_exponent", "speed")


def load_constants(path: Union[str, Path]) -> PhysicalConstants:
    """Read ``G``, ``hbar``, ``c``, ``k_B`` (any subset) from a config file."""
    values = load_config(path)
    check_known(values, CONSTANT_KEYS)
    return PhysicalConstants(**{k: as_float(values, k) for k in values})


def load_spectral_density(path: Union[str, Path]) -> SpectralDensity:
    values = load_config(path)
    check_known(values, SPECTRAL_KEYS)
    return SpectralDensity(**{k: as_float(values, k) for k in values})
