"""Telling entanglement decoherence apart from classical dephasing and collapse.

Three mechanisms are run through three interferometric protocols:

========================  ============  ==========  ===========
mechanism                 free Ramsey   echo        closed loop
========================  ============  ==========  ===========
entangling                decays        decays      restored
classical dephasing       decays        restored    restored
collapse                  decays        decays      decays
========================  ============  ==========  ===========

Echo swaps the branches at ``T/2``.  Closed loop assumes control over the
environment as well: branch-conditioned field displacements are undone
before readout and deterministic system phases are refocused.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import PulseSequence
from .model import (CouplingProfile, DomainError, EnvironmentState, ModeGrid, SpectralDensity,
                    build_mode_grid, symmetric_profiles)
from .visibility import VisibilityResult, mode_log_coherence, visibility

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class Entangling:
    grid: ModeGrid
    profiles: Tuple[CouplingProfile, CouplingProfile]
    env: Optional[EnvironmentState] = None


@dataclass(frozen=True)
class ClassicalDephasing:
    """Relative phase ``detuning * t`` with Gaussian shot-to-shot spread ``sigma``.

    With ``ensemble_size=None`` the Gaussian average is taken analytically;
    otherwise that many detunings are drawn from ``seed``.
    """

    detuning: float
    sigma: float = 0.0
    ensemble_size: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError("sigma must be non-negative")
        if self.ensemble_size is not None and self.ensemble_size < 1:
            raise DomainError("ensemble_size must be >= 1")


@dataclass(frozen=True)
class Collapse:
    gamma_c: float

    def __post_init__(self):
        if self.gamma_c < 0:
            raise DomainError("collapse rate must be non-negative")


NoiseModel = Union[Entangling, ClassicalDephasing, Collapse]


class ExperimentKind(enum.Enum):
    FREE_RAMSEY = "free"
    ECHO = "echo"
    CLOSED_LOOP = "closed_loop"


@dataclass(frozen=True)
class VisibilityTrace:
    times: np.ndarray
    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        if not len(self.times) == len(self.magnitudes) == len(self.phases):
            raise DomainError("trace arrays must have equal length")
        # Exponentials may underflow to 0 for strong decoherence.
        if np.any(self.magnitudes < 0) or np.any(self.magnitudes > 1 + 1e-12):
            raise DomainError("visibility magnitudes must lie in [0, 1]")


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("need a nonempty 1-d array of times")
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise DomainError("times must be positive and strictly increasing")
    return times


def _entangling_point(model: Entangling, kind: ExperimentKind, t: float) -> VisibilityResult:
    if kind is ExperimentKind.FREE_RAMSEY:
        return visibility(model.grid, model.profiles, model.env, PulseSequence.free(t), t)
    restore = kind is ExperimentKind.CLOSED_LOOP
    return visibility(model.grid, model.profiles, model.env, PulseSequence.echo(t), t,
                      restore_environment=restore)


def _ensemble_average(phases: np.ndarray) -> Tuple[float, float]:
    # Real and imaginary means taken separately: numpy's complex mean and
    # complex division both round (n + 0j) / n to just below 1.
    n = phases.size
    z = complex(np.sum(np.cos(phases)) / n, np.sum(np.sin(phases)) / n)
    return abs(z), math.atan2(z.imag, z.real)


def _classical_point(model: ClassicalDephasing, kind: ExperimentKind, t: float,
                     offsets: Optional[np.ndarray]) -> Tuple[float, float]:
    if kind is ExperimentKind.FREE_RAMSEY:
        if offsets is None:
            return math.exp(-0.5 * (model.sigma * t) ** 2), model.detuning * t
        return _ensemble_average((model.detuning + model.sigma * offsets) * t)
    # Phase picked up before the swap is undone after it: phi*(t/2) - phi*(t - t/2).
    half = 0.5 * t
    rates = model.detuning + model.sigma * (offsets if offsets is not None else np.zeros(1))
    # t - t/2 is exact in binary floating point, so each shot cancels to 0 exactly.
    return _ensemble_average(rates * half - rates * (t - half))


def simulate_experiment(model: NoiseModel, kind: ExperimentKind, times: Sequence[float]) -> VisibilityTrace:
    """Visibility at each readout time under one protocol."""
    times = _check_times(times)
    mags = np.empty_like(times)
    phases = np.empty_like(times)
    if isinstance(model, Entangling):
        for i, t in enumerate(times):
            res = _entangling_point(model, kind, float(t))
            mags[i], phases[i] = res.magnitude, res.phase
    elif isinstance(model, ClassicalDephasing):
        offsets = None
        if model.ensemble_size is not None:
            offsets = np.random.default_rng(model.seed).standard_normal(model.ensemble_size)
        for i, t in enumerate(times):
            mags[i], phases[i] = _classical_point(model, kind, float(t), offsets)
    elif isinstance(model, Collapse):
        mags[:] = np.exp(-model.gamma_c * times)
        phases[:] = 0.0
    else:
        raise DomainError(f"unknown noise model {model!r}")
    return VisibilityTrace(times, mags, phases)


def simulate_all(model: NoiseModel, times) -> Dict[ExperimentKind, VisibilityTrace]:
    return {kind: simulate_experiment(model, kind, times) for kind in ExperimentKind}


@dataclass(frozen=True)
class Verdict:
    label: str  # classical | entangling | collapse | inconsistent
    evidence: Dict[str, Dict[str, float]] = field(default_factory=dict)


def _restored(trace: VisibilityTrace, epsilon: float) -> bool:
    return bool(np.all(np.abs(1.0 - trace.magnitudes) <= epsilon))


def classify(traces: Mapping[ExperimentKind, VisibilityTrace], epsilon: float = DEFAULT_EPSILON) -> Verdict:
    """Decide the mechanism from echo and closed-loop restoration.

    ``echo restored and loop restored`` means classical, ``loop only`` means
    entangling, ``neither`` means collapse.  Echo restored without the loop
    is impossible for the three mechanisms and is labelled ``inconsistent``.
    """
    for kind in (ExperimentKind.ECHO, ExperimentKind.CLOSED_LOOP):
        if kind not in traces:
            raise DomainError(f"classification needs a {kind.value} trace")
    axes = [np.asarray(tr.times) for tr in traces.values()]
    if any(a.shape != axes[0].shape or np.any(a != axes[0]) for a in axes[1:]):
        raise DomainError("traces must share the same time axis")
    evidence = {
        kind.value: {
            "max_deviation": float(np.max(np.abs(1.0 - tr.magnitudes))),
            "final_magnitude": float(tr.magnitudes[-1]),
        }
        for kind, tr in sorted(traces.items(), key=lambda kv: kv[0].value)
    }
    echo = _restored(traces[ExperimentKind.ECHO], epsilon)
    loop = _restored(traces[ExperimentKind.CLOSED_LOOP], epsilon)
    if echo and loop:
        label = "classical"
    elif loop:
        label = "entangling"
    elif echo:
        label = "inconsistent"
    else:
        label = "collapse"
    return Verdict(label, evidence)


def classical_fringe(detuning: float, t: float, averaging_window: float) -> float:
    """Fringe contrast of ``exp(i detuning tau)`` averaged over a window centred on ``t``.

    The centre only shifts the fringe phase, so the contrast is
    ``|sinc(detuning * window / 2)|``; a zero window is a single shot.
    """
    if averaging_window < 0:
        raise DomainError("averaging window must be non-negative")
    if averaging_window == 0:
        return 1.0
    return float(abs(np.sinc(detuning * averaging_window / (2.0 * math.pi))))


@dataclass(frozen=True)
class FakeDecoherence:
    times: np.ndarray
    overlaps: np.ndarray  # mean over modes of |<E1(t)|E2(t)>| per mode
    final: VisibilityResult


def fake_decoherence_demo(grid: ModeGrid, profiles: Tuple[CouplingProfile, CouplingProfile],
                          times: Sequence[float], env: Optional[EnvironmentState] = None) -> FakeDecoherence:
    """Branch-field distinguishability inside the interferometer and at recombination."""
    times = np.asarray(times, dtype=float)
    T = min(p.duration for p in profiles)
    if np.any(times < 0) or np.any(times > T):
        raise DomainError(f"times must lie within the profile coverage [0, {T}]")
    overlaps = np.array([
        float(np.mean(np.exp(mode_log_coherence(grid, profiles, env, float(t)).real))) for t in times
    ])
    return FakeDecoherence(times, overlaps, visibility(grid, profiles, env, T=T))


# --- Monte-Carlo classification benchmark ---------------------------------

MECHANISMS = ("entangling", "classical", "collapse")


def random_model(mechanism: str, rng: np.random.Generator, t_max: float) -> NoiseModel:
    if mechanism == "entangling":
        sd = SpectralDensity(prefactor=rng.uniform(0.2, 1.0), exponent=1.5,
                             cutoff=rng.uniform(0.5, 2.0), dos_exponent=2.0)
        return Entangling(build_mode_grid(sd, 64), symmetric_profiles(t_max))
    if mechanism == "classical":
        return ClassicalDephasing(detuning=rng.uniform(-2.0, 2.0), sigma=rng.uniform(0.1, 1.0),
                                  ensemble_size=256, seed=int(rng.integers(2**31)))
    if mechanism == "collapse":
        return Collapse(10 ** rng.uniform(-3.0, 1.0))
    raise DomainError(f"unknown mechanism {mechanism!r}; choose from {MECHANISMS}")


def _trial(args) -> Verdict:
    mechanism, seed_seq, n_times, epsilon = args
    rng = np.random.default_rng(seed_seq)
    t_max = rng.uniform(1.0, 5.0)
    times = np.linspace(t_max / n_times, t_max, n_times)
    model = random_model(mechanism, rng, t_max)
    return classify(simulate_all(model, times), epsilon)


def classification_benchmark(mechanism: str, n_trials: int = 100, seed: int = 0, n_times: int = 20,
                             epsilon: float = DEFAULT_EPSILON, threads: int = 1) -> List[Verdict]:
    """Classify ``n_trials`` randomly parametrised traces of one mechanism.

    Every trial draws from its own spawned seed, so the verdict list does
    not depend on ``threads``.
    """
    children = np.random.SeedSequence(seed).spawn(n_trials)
    jobs = [(mechanism, child, n_times, epsilon) for child in children]
    if threads <= 1:
        return [_trial(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_trial, jobs))


def write_traces_csv(traces: Mapping[ExperimentKind, VisibilityTrace], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["time", "protocol", "magnitude", "phase"])
    for kind in ExperimentKind:
        if kind not in traces:
            continue
        tr = traces[kind]
        for t, m, p in zip(tr.times, tr.magnitudes, tr.phases):
            writer.writerow([repr(float(t)), kind.value, repr(float(m)), repr(float(p))])


def write_verdict_csv(verdicts: Sequence[Tuple[str, Verdict]], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["case", "label", "echo_max_deviation", "closed_loop_max_deviation",
                     "free_final_magnitude"])
    for case, v in verdicts:
        writer.writerow([case, v.label,
                         repr(v.evidence.get("echo", {}).get("max_deviation", float("nan"))),
                         repr(v.evidence.get("closed_loop", {}).get("max_deviation", float("nan"))),
                         repr(v.evidence.get("free", {}).get("final_magnitude", float("nan")))])
