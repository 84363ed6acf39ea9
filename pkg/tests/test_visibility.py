import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from gravidec.dynamics import PulseSequence, accumulate, displacement_free, overlap
from gravidec.model import (SI, CouplingProfile, DomainError, EnvironmentState, ModeGrid,
                            SpectralDensity, build_mode_grid, planck_scales, symmetric_profiles)
from gravidec.visibility import (DimensionalParams, decoherence_exponent, dimensional_rate,
                                 penrose_rate, rate_from_grid, rate_integral, visibility)


def coherence_from_overlap(omega, g, profiles, T, alpha):
    """<E1|E2> assembled from the Glauber overlap and D(b)|a> = e^{i Im(b conj(a))}|a+b>."""
    (b1, f1), (b2, f2) = (accumulate(p.clipped(T), omega, g) for p in profiles)
    b1, b2, f1, f2 = complex(b1), complex(b2), float(f1), float(f2)
    ph1 = cmath.exp(-1j * f1 + 1j * (b1 * alpha.conjugate()).imag)
    ph2 = cmath.exp(-1j * f2 + 1j * (b2 * alpha.conjugate()).imag)
    return ph1.conjugate() * ph2 * overlap(alpha + b1, alpha + b2)


def thermal_average_by_hermite(omega, g, profiles, T, nbar, n_points=60):
    """Average the pure-state coherence over the Gaussian P-function (Gauss-Hermite)."""
    x, w = np.polynomial.hermite.hermgauss(n_points)
    s = math.sqrt(nbar)
    total = 0j
    for xi, wi in zip(x, w):
        for yj, wj in zip(x, w):
            total += wi * wj * coherence_from_overlap(omega, g, profiles, T, complex(s * xi, s * yj))
    return total / math.pi


def test_zero_time():
    grid = build_mode_grid(SpectralDensity(), 32)
    res = visibility(grid, symmetric_profiles(3.0), T=0.0)
    assert (res.magnitude, res.phase) == (1.0, 0.0)


def test_symmetric_single_mode_half_period():
    grid = ModeGrid.single(1.0, 1.0)
    res = visibility(grid, symmetric_profiles(math.pi), T=math.pi)
    d = displacement_free(1.0, 1.0, math.pi)
    assert res.magnitude == pytest.approx(abs(overlap(d, -d)), rel=1e-14)
    assert res.magnitude == pytest.approx(math.exp(-8), rel=1e-14)


def test_thermal_factor_single_mode():
    grid = ModeGrid.single(1.0, 1.0)
    env = EnvironmentState.thermal(1, 1.0)
    res = visibility(grid, symmetric_profiles(math.pi), env, T=math.pi)
    assert res.magnitude == pytest.approx(math.exp(-24), rel=1e-13)


@pytest.mark.parametrize("nbar", [0.3, 1.0, 2.5])
def test_thermal_factor_against_p_function_quadrature(nbar):
    T = 1.7
    profiles = (CouplingProfile.from_breakpoints([0, 0.6, T], [0.4, -0.2]), CouplingProfile.constant(-0.3, T))
    ref = thermal_average_by_hermite(1.3, 1.0, profiles, T, nbar)
    res = visibility(ModeGrid.single(1.3, 1.0), profiles, EnvironmentState.thermal(1, nbar), T=T)
    assert res.value == pytest.approx(ref, abs=1e-12)


def test_matches_overlap_assembly_with_coherent_amplitude():
    rng = np.random.default_rng(3)
    for _ in range(20):
        T = rng.uniform(0.2, 6)
        profiles = tuple(CouplingProfile.from_breakpoints([0, rng.uniform(0, T), T], rng.normal(size=2))
                         for _ in range(2))
        alpha = complex(*rng.normal(size=2))
        omega = rng.uniform(0.2, 3)
        env = EnvironmentState(np.array([alpha]), np.zeros(1))
        res = visibility(ModeGrid.single(omega, 0.8), profiles, env, T=T)
        assert res.value == pytest.approx(coherence_from_overlap(omega, 0.8, profiles, T, alpha), abs=1e-12)


@settings(max_examples=50)
@given(T=st.floats(0.0, 20.0), n1=st.floats(0, 3), bump=st.floats(0, 3))
def test_thermal_monotonicity(T, n1, bump):
    grid = build_mode_grid(SpectralDensity(cutoff=2.0), 8)
    profiles = symmetric_profiles(20.0, 0.5)
    nbar = np.full(8, n1)
    hotter = nbar.copy()
    hotter[3] += bump
    m0 = visibility(grid, profiles, EnvironmentState(np.zeros(8), nbar), T=T).magnitude
    m1 = visibility(grid, profiles, EnvironmentState(np.zeros(8), hotter), T=T).magnitude
    assert m1 <= m0
    assert 0.0 <= m1 <= 1.0


def test_mode_additivity():
    grid = build_mode_grid(SpectralDensity(prefactor=0.7, cutoff=3.0), 40)
    profiles = symmetric_profiles(4.0)
    lo, hi = grid.split(17)
    total = decoherence_exponent(grid, profiles, T=4.0)
    assert total == pytest.approx(decoherence_exponent(lo, profiles, T=4.0)
                                  + decoherence_exponent(hi, profiles, T=4.0), rel=1e-13)


@given(T=st.floats(0, 50))
def test_identical_profiles_no_decoherence(T):
    grid = build_mode_grid(SpectralDensity(cutoff=5.0), 16)
    prof = CouplingProfile.from_breakpoints([0, 10.0, 50.0], [1.3, -0.4])
    assert visibility(grid, (prof, prof), T=T).magnitude == 1.0


def test_length_mismatch():
    with pytest.raises(DomainError):
        visibility(ModeGrid.single(1.0), symmetric_profiles(1.0), EnvironmentState.vacuum(2), T=1.0)


def test_echo_single_mode_full_period():
    # One branch coupled: branch difference is the echo shift itself, |delta|^2 = 16.
    grid = ModeGrid.single(1.0, 1.0)
    T = 2 * math.pi
    one_sided = (CouplingProfile.constant(1.0, T), CouplingProfile.constant(0.0, T))
    assert visibility(grid, one_sided, seq=PulseSequence.echo(T)).magnitude == pytest.approx(math.exp(-8), rel=1e-13)
    # Symmetric branches double the difference.
    sym = visibility(grid, symmetric_profiles(T), seq=PulseSequence.echo(T))
    assert sym.magnitude == pytest.approx(math.exp(-32), rel=1e-12)


# --- rate integral -----------------------------------------------------------

def test_rate_zero_coupling():
    assert rate_integral(SpectralDensity(prefactor=0.0), 2.0).gamma == 0.0


def test_rate_single_delta_mode_matches_shift():
    grid = ModeGrid.single(1.7, 0.9)
    for T in (0.3, 2.0, 7.1):
        est = rate_from_grid(grid, T, "exact")
        assert est.gamma * T == pytest.approx(abs(displacement_free(0.9, 1.7, T)) ** 2, rel=1e-13)
        assert est.convention_tag == "exact"


def test_rate_prefactor_scaling():
    sd = SpectralDensity(prefactor=0.3, cutoff=2.0)
    for kernel in ("exact", "sin2"):
        assert rate_integral(sd.scaled(2.0), 1.5, kernel).gamma == pytest.approx(
            4 * rate_integral(sd, 1.5, kernel).gamma, rel=1e-14)


@pytest.mark.parametrize("kernel,K", [("exact", lambda x: 4 * math.sin(x / 2) ** 2),
                                      ("sin2", lambda x: math.sin(x) ** 2)])
def test_rate_against_adaptive_quadrature(kernel, K):
    sd = SpectralDensity(prefactor=0.8, exponent=1.5, cutoff=3.0, dos_exponent=2.0)
    T = 2.5
    f = lambda w: (0.8 * w**1.5) ** 2 * w**2 * K(w * T) / w**2  # noqa: E731
    ref = quad(f, 0, 3.0, epsabs=0, epsrel=1e-13, limit=200)[0] / T
    assert rate_integral(sd, T, kernel).gamma == pytest.approx(ref, rel=1e-10)


def test_rate_convergence_under_refinement():
    sd = SpectralDensity(prefactor=0.5, cutoff=4.0)
    for T in (0.5, 3.0, 10.0):
        a = rate_integral(sd, T, "exact", 256).gamma
        b = rate_integral(sd, T, "exact", 512).gamma
        assert abs(a - b) < 1e-6 * abs(b)


def test_rate_errors():
    with pytest.raises(DomainError):
        rate_integral(SpectralDensity(), 0.0)
    with pytest.raises(DomainError):
        rate_integral(SpectralDensity(), 1.0, "bogus")


# --- dimensional and zero-temperature estimates ------------------------------

def test_dimensional_unit_groups():
    scales = planck_scales(SI)
    p = DimensionalParams(delta_E=scales.E_P, delta_x=SI.c * 1.0, theta=SI.hbar / SI.k_B, Omega=1.0, n=1)
    assert dimensional_rate(p, scales, SI).gamma == pytest.approx(1.0, rel=1e-14)


def test_dimensional_quadratic_in_energy():
    p = DimensionalParams(1e-20, 1e-6, 4.0, 1e5, 2)
    q = DimensionalParams(2e-20, 1e-6, 4.0, 1e5, 2)
    assert dimensional_rate(q).gamma == pytest.approx(4 * dimensional_rate(p).gamma, rel=1e-15)


def test_dimensional_log_slope_in_cutoff():
    def slope(n):
        h = 1e-3
        lo = dimensional_rate(DimensionalParams(1e-20, 1e-6, 4.0, 1e5 * math.exp(-h), n)).gamma
        hi = dimensional_rate(DimensionalParams(1e-20, 1e-6, 4.0, 1e5 * math.exp(h), n)).gamma
        return (math.log(hi) - math.log(lo)) / (2 * h)
    assert slope(1) == pytest.approx(1.0, rel=1e-8)
    assert slope(2) == pytest.approx(2 * slope(1), rel=1e-8)


def test_dimensional_validation():
    with pytest.raises(DomainError):
        DimensionalParams(1.0, 1.0, 1.0, 1.0, 0)
    with pytest.raises(DomainError):
        DimensionalParams(-1.0, 1.0, 1.0, 1.0, 1)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_penrose_unit_groups(n):
    scales = planck_scales(SI)
    Omega = 3.0e4
    assert penrose_rate(scales.m_P, SI.c / Omega, Omega, n).gamma == pytest.approx(Omega, rel=1e-13)


def test_penrose_is_zero_temperature_dimensional():
    m, dx, Omega, n = 3e-15, 2e-7, 5e5, 3
    theta = SI.hbar * Omega / SI.k_B
    dim = dimensional_rate(DimensionalParams(m * SI.c**2, dx, theta, Omega, n)).gamma
    assert penrose_rate(m, dx, Omega, n).gamma == pytest.approx(dim, rel=1e-13)


def test_penrose_hand_arithmetic():
    # m/m_P = 1e-17 / 2.176434e-8 = 4.594672e-10, squared 2.111101e-19;
    # dx/c * Omega = 1e-7 / 299792458 * 1e6 = 3.335641e-10; times Omega = 1e6.
    expected = 2.111101e-19 * 3.335641e-10 * 1e6
    assert penrose_rate(1e-17, 1e-7, 1e6, 1).gamma == pytest.approx(expected, rel=1e-6)
