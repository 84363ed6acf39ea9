"""``gravidec`` command line.

Each subcommand reads an optional ``key = value`` config file; parameters
given on the command line (``--set key=value`` or ``--key value``) override
it.  Sweeps are described by ``sweep.param``, ``sweep.start``,
``sweep.stop``, ``sweep.steps`` and ``sweep.scale`` (``linear`` or ``log``).

Exit codes: 0 success, 2 configuration error, 3 oracle check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import fock, protocols, thresholds
from .config import ConfigError, as_int, check_known, load_config
from .dynamics import PulseSequence
from .model import (SI, CouplingProfile, DomainError, EnvironmentState, ModeGrid, SpectralDensity,
                    build_mode_grid, planck_scales, sequential_profiles, symmetric_profiles)
from .visibility import (DimensionalParams, decoherence_exponent, dimensional_rate, penrose_rate,
                         rate_integral, visibility)

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE = 0, 2, 3

_PI_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*\*?\s*pi\s*$")


def _number(key: str, text: str) -> float:
    """Float, optionally written as a multiple of ``pi`` (``4pi``, ``0.5*pi``)."""
    match = _PI_RE.match(text)
    try:
        if match:
            coeff = match.group(1)
            return (float(coeff) if coeff not in ("", "+", "-") else float(coeff + "1")) * math.pi
        return float(text)
    except ValueError:
        raise ConfigError(f"parameter '{key}' is not a number: {text!r}", key) from None


def _complex_list(key: str, text: str) -> np.ndarray:
    try:
        return np.array([complex(part.strip().replace(" ", "")) for part in text.split(",")])
    except ValueError:
        raise ConfigError(f"parameter '{key}' is not a comma-separated list of numbers: {text!r}", key) from None


GRID_DEFAULTS = {
    "grid": "continuum",  # continuum | single
    "n_modes": "64",
    "prefactor": "1.0",
    "exponent": "1.5",
    "cutoff": "1.0",
    "dos_exponent": "2.0",
    "speed": "1.0",
    "omega": "1.0",
    "g": "1.0",
    "profile": "symmetric",  # symmetric | one_sided | sequential | custom
    "coupling": "1.0",
    "profile1": "",
    "profile2": "",
    "nbar": "0.0",
    "alpha": "0",
}

SWEEP_DEFAULTS = {
    "sweep.param": "T",
    "sweep.start": "1.0",
    "sweep.stop": "10.0",
    "sweep.steps": "10",
    "sweep.scale": "linear",
}

SCHEMAS: Dict[str, Dict[str, str]] = {
    "visibility": {**GRID_DEFAULTS, **SWEEP_DEFAULTS, "T": "1.0"},
    "echo": {**GRID_DEFAULTS, **SWEEP_DEFAULTS, "T": "1.0"},
    "rate": {"prefactor": "1.0", "exponent": "1.5", "cutoff": "1.0", "dos_exponent": "2.0",
             "speed": "1.0", "n_modes": "512", "T": "1.0", **SWEEP_DEFAULTS},
    "dimensional": {"m": "1e-17", "delta_E": "", "delta_x": "1e-7", "theta": "1.0", "Omega": "1e6",
                    "n": "1", **SWEEP_DEFAULTS, "sweep.param": "", "sweep.start": "1e3",
                    "sweep.stop": "1e9", "sweep.scale": "log"},
    "discriminate": {**GRID_DEFAULTS, "mechanism": "entangling", "detuning": "0.5", "sigma": "0.3",
                     "ensemble_size": "0", "gamma_c": "0.1", "t_max": "5.0", "n_times": "20",
                     "epsilon": "1e-6", "trials": "1"},
    "fake": {"omega": "1.0", "g": "1.0", "T": "4pi", "n_times": "9"},
    "emission": {"m": "9.1093837015e-31", "a": "5.29177210903e-11", "omega": "4.13e16"},
    "baym": {"m": "2.176434e-8", "r": "1.0", "d": "1e-3"},
    "fluctuation": {"coeffs": "1,1", "nbar": "0,0", "alpha": "0,0"},
    "oracle-check": {"n_cases": "20", "max_modes": "3", "cutoff": "64", "dt": "0.01",
                     "tolerance": "1e-6"},
}


class Params:
    """Typed view of the merged string parameters."""

    def __init__(self, values: Dict[str, str]):
        self.values = values

    def str(self, key: str) -> str:
        return self.values[key]

    def float(self, key: str) -> float:
        return _number(key, self.values[key])

    def int(self, key: str) -> int:
        return as_int(self.values, key)

    def with_value(self, key: str, value: float) -> "Params":
        return Params({**self.values, key: repr(float(value))})


# --- shared builders --------------------------------------------------------

def _grid(p: Params) -> ModeGrid:
    kind = p.str("grid")
    if kind == "single":
        return ModeGrid.single(p.float("omega"), p.float("g"))
    if kind == "continuum":
        sd = SpectralDensity(p.float("prefactor"), p.float("exponent"), p.float("cutoff"),
                             p.float("dos_exponent"), p.float("speed"))
        return build_mode_grid(sd, p.int("n_modes"))
    raise ConfigError(f"parameter 'grid' must be 'continuum' or 'single', got {kind!r}", "grid")


def _profiles(p: Params, T: float):
    kind, g = p.str("profile"), p.float("coupling")
    T = T if T > 0 else 1.0  # a T = 0 point reads no coupling; any span will do
    if kind == "symmetric":
        return symmetric_profiles(T, g)
    if kind == "one_sided":
        return CouplingProfile.constant(g, T), CouplingProfile.constant(0.0, T)
    if kind == "sequential":
        return sequential_profiles(T, g)
    if kind == "custom":
        return CouplingProfile.from_config(p.str("profile1")), CouplingProfile.from_config(p.str("profile2"))
    raise ConfigError(f"parameter 'profile' has unknown value {kind!r}", "profile")


def _env(p: Params, n: int) -> EnvironmentState:
    alpha = _complex_list("alpha", p.str("alpha"))
    nbar = _complex_list("nbar", p.str("nbar")).real
    return EnvironmentState(np.broadcast_to(alpha, (n,)).copy(), np.broadcast_to(nbar, (n,)).copy())


def _sweep_values(p: Params) -> np.ndarray:
    start, stop, steps = p.float("sweep.start"), p.float("sweep.stop"), p.int("sweep.steps")
    scale = p.str("sweep.scale")
    if steps < 1:
        raise ConfigError("sweep.steps must be >= 1", "sweep.steps")
    if steps == 1:
        return np.array([start])
    if not start < stop:
        raise ConfigError("sweep.start must be smaller than sweep.stop", "sweep.start")
    if scale == "linear":
        return np.linspace(start, stop, steps)
    if scale == "log":
        if start <= 0:
            raise ConfigError("log sweeps need sweep.start > 0", "sweep.start")
        return np.geomspace(start, stop, steps)
    raise ConfigError(f"sweep.scale must be 'linear' or 'log', got {scale!r}", "sweep.scale")


def _sweep(p: Params, threads: int, point: Callable[[Params], List[list]]) -> List[list]:
    """Evaluate ``point`` across the sweep; rows come back in sweep order."""
    name = p.str("sweep.param")
    if name not in p.values or name.startswith("sweep."):
        raise ConfigError(f"sweep.param names unknown parameter '{name}'", "sweep.param")
    points = [p.with_value(name, v) for v in _sweep_values(p)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(point, points))
    else:
        chunks = [point(q) for q in points]
    return [row for chunk in chunks for row in chunk]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(header: Sequence[str], rows: Sequence[Sequence], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])


def _print_kv(pairs: Sequence[tuple], out) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        out.write(f"{key:<{width}} = {_fmt(value)}\n")


# --- subcommands ------------------------------------------------------------

def _visibility_point(p: Params) -> List[list]:
    T = p.float("T")
    grid = _grid(p)
    res = visibility(grid, _profiles(p, T), _env(p, len(grid)), PulseSequence.free(T), T)
    gamma = decoherence_exponent(grid, _profiles(p, T), _env(p, len(grid)), T=T) / T if T > 0 else 0.0
    return [[p.float(p.str("sweep.param")), res.magnitude, res.phase, gamma, "exact"]]


def _echo_point(p: Params) -> List[list]:
    T = p.float("T")
    grid = _grid(p)
    env = _env(p, len(grid))
    rows = []
    for tag, seq in (("free", PulseSequence.free(T)), ("echo", PulseSequence.echo(T))):
        res = visibility(grid, _profiles(p, T), env, seq, T)
        gamma = decoherence_exponent(grid, _profiles(p, T), env, seq, T) / T if T > 0 else 0.0
        rows.append([p.float(p.str("sweep.param")), res.magnitude, res.phase, gamma, tag])
    return rows


def _rate_point(p: Params) -> List[list]:
    T = p.float("T")
    sd = SpectralDensity(p.float("prefactor"), p.float("exponent"), p.float("cutoff"),
                         p.float("dos_exponent"), p.float("speed"))
    rows = []
    for kernel in ("exact", "sin2"):
        est = rate_integral(sd, T, kernel, p.int("n_modes"))
        rows.append([p.float(p.str("sweep.param")), math.exp(-est.gamma * T), 0.0, est.gamma, kernel])
    return rows


def cmd_visibility(p, args, out):
    header = [p.str("sweep.param"), "magnitude", "phase", "gamma", "convention_tag"]
    _write_csv(header, _sweep(p, args.threads, _visibility_point), out)


def cmd_echo(p, args, out):
    header = [p.str("sweep.param"), "magnitude", "phase", "gamma", "convention_tag"]
    _write_csv(header, _sweep(p, args.threads, _echo_point), out)


def cmd_rate(p, args, out):
    header = [p.str("sweep.param"), "magnitude", "phase", "gamma", "convention_tag"]
    _write_csv(header, _sweep(p, args.threads, _rate_point), out)


def _dimensional_point(p: Params) -> List[list]:
    m = p.float("m")
    delta_E = p.float("delta_E") if p.str("delta_E") else m * SI.c**2
    dx, Omega, n = p.float("delta_x"), p.float("Omega"), p.int("n")
    scales = planck_scales(SI)
    dim = dimensional_rate(DimensionalParams(delta_E, dx, p.float("theta"), Omega, n), scales, SI)
    pen = penrose_rate(m, dx, Omega, n, scales, SI)
    return [[dim.gamma, pen.gamma]]


def cmd_dimensional(p, args, out):
    if p.str("sweep.param"):
        name = p.str("sweep.param")
        rows = _sweep(p, args.threads, lambda q: [[q.float(name), *_dimensional_point(q)[0]]])
        _write_csv([name, "gamma_dimensional", "gamma_penrose"], rows, out)
        return
    dim, pen = _dimensional_point(p)[0]
    _print_kv([("gamma_dimensional_per_s", dim), ("gamma_penrose_per_s", pen)], out)


def _mechanism_model(p: Params, times: np.ndarray, seed: int):
    mech = p.str("mechanism")
    if mech == "entangling":
        T = float(times[-1])
        grid = _grid(p)
        return protocols.Entangling(grid, _profiles(p, T), _env(p, len(grid)))
    if mech == "classical":
        size = p.int("ensemble_size")
        return protocols.ClassicalDephasing(p.float("detuning"), p.float("sigma"), size or None, seed)
    if mech == "collapse":
        return protocols.Collapse(p.float("gamma_c"))
    raise ConfigError(f"parameter 'mechanism' has unknown value {mech!r}", "mechanism")


def cmd_discriminate(p, args, out):
    eps, trials = p.float("epsilon"), p.int("trials")
    if trials > 1:
        verdicts = protocols.classification_benchmark(p.str("mechanism"), trials, args.seed,
                                                      p.int("n_times"), eps, args.threads)
        protocols.write_verdict_csv([(str(i), v) for i, v in enumerate(verdicts)], out)
        correct = sum(v.label == p.str("mechanism") for v in verdicts)
        sys.stderr.write(f"{correct}/{trials} classified as {p.str('mechanism')}\n")
        return
    n = p.int("n_times")
    t_max = p.float("t_max")
    times = np.linspace(t_max / n, t_max, n)
    traces = protocols.simulate_all(_mechanism_model(p, times, args.seed), times)
    verdict = protocols.classify(traces, eps)
    protocols.write_traces_csv(traces, out)
    sys.stderr.write(f"verdict = {verdict.label}\n")


def cmd_fake(p, args, out):
    T = p.float("T")
    grid = ModeGrid.single(p.float("omega"), p.float("g"))
    times = np.linspace(0.0, T, p.int("n_times"))
    demo = protocols.fake_decoherence_demo(grid, sequential_profiles(T), times)
    _write_csv(["time", "overlap"], list(zip(demo.times, demo.overlaps)), out)
    sys.stderr.write(f"final magnitude = {demo.final.magnitude!r}\n")


def cmd_emission(p, args, out):
    res = thresholds.quadrupole_emission(p.float("m"), p.float("a"), p.float("omega"), SI)
    _print_kv([("power_W", res.power), ("gamma_s_per_s", res.gamma_s), ("half_life_s", res.half_life)], out)


def cmd_baym(p, args, out):
    res = thresholds.baym_condition(p.float("m"), p.float("r"), p.float("d"), SI)
    _print_kv([("lhs_J", res.lhs), ("rhs_J", res.rhs), ("satisfied", str(res.satisfied).lower()),
               ("d_crit_m", res.d_crit)], out)


def cmd_fluctuation(p, args, out):
    coeffs = _complex_list("coeffs", p.str("coeffs"))
    nbar = _complex_list("nbar", p.str("nbar")).real
    alpha = _complex_list("alpha", p.str("alpha"))
    try:
        env = EnvironmentState(alpha, nbar)
    except DomainError as exc:
        raise ConfigError(str(exc), "nbar") from None
    res = thresholds.christoffel_fluctuation(coeffs, env)
    _print_kv([("variance", res.variance)], out)


def cmd_oracle_check(p, args, out) -> int:
    rng = np.random.default_rng(args.seed)
    max_modes = p.int("max_modes")
    T = math.pi
    cases = [fock.OracleCase(ModeGrid.single(1.0, 1.0), symmetric_profiles(T), T,
                             np.zeros(1, complex), label="symmetric_pi")]
    for i in range(p.int("n_cases")):
        n_modes = 1 if i % 2 == 0 else max_modes
        cases.append(fock.random_case(rng, n_modes, label=f"random_{i}"))
    cutoff, dt = p.int("cutoff"), p.float("dt")
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(lambda c: fock.compare_case(c, cutoff, dt), cases))
    _write_csv(fock.COMPARISON_COLUMNS, [[r[k] for k in fock.COMPARISON_COLUMNS] for r in rows], out)
    worst = max(r["abs_error"] for r in rows)
    tail = max(r["truncation_tail"] for r in rows)
    sys.stderr.write(f"max abs error = {worst:.3e}, max truncation tail = {tail:.3e}\n")
    ok = worst < p.float("tolerance") and tail <= fock.RELIABLE_TAIL
    return EXIT_OK if ok else EXIT_ORACLE


COMMANDS = {
    "visibility": cmd_visibility,
    "echo": cmd_echo,
    "rate": cmd_rate,
    "dimensional": cmd_dimensional,
    "discriminate": cmd_discriminate,
    "fake": cmd_fake,
    "emission": cmd_emission,
    "baym": cmd_baym,
    "fluctuation": cmd_fluctuation,
    "oracle-check": cmd_oracle_check,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gravidec", description=__doc__.split("\n\n")[0], allow_abbrev=False)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key = value parameter file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter (repeatable)")
    parser.add_argument("--output", "-o", help="CSV / report destination (default stdout)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default: config 'seed' or 0)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for sweeps (default: $GRAVIDEC_THREADS or 1)")
    return parser


def _overrides(extra: Sequence[str], sets: Sequence[str]) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    it = iter(extra)
    for token in it:
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            value = next(it, None)
            if value is None:
                raise ConfigError(f"parameter '{key}' is missing a value", key)
        values[key] = value
    return values


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    parser = _parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        values = dict(SCHEMAS[args.command])
        file_values = load_config(args.config) if args.config else {}
        seed = file_values.pop("seed", None)
        threads = file_values.pop("threads", None)
        check_known(file_values, values)
        values.update(file_values)
        cli_values = _overrides(extra, args.set)
        check_known(cli_values, values)
        values.update(cli_values)
        args.seed = args.seed if args.seed is not None else int(seed) if seed is not None else 0
        env_threads = os.environ.get("GRAVIDEC_THREADS")
        if args.threads is None:
            args.threads = int(env_threads) if env_threads else int(threads) if threads else 1
        buffer = io.StringIO()
        code = COMMANDS[args.command](Params(values), args, buffer) or EXIT_OK
    except (ConfigError, DomainError, FileNotFoundError, ValueError) as exc:
        key = getattr(exc, "key", None)
        prefix = f"gravidec {args.command}: "
        sys.stderr.write(prefix + (f"[{key}] " if key else "") + f"{exc}\n")
        return EXIT_CONFIG
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buffer.getvalue())
    else:
        stdout.write(buffer.getvalue())
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
