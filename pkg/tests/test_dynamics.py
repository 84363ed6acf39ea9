import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from gravidec.dynamics import (PulseSequence, accumulate, displacement_free, displacement_profile,
                               displacement_sequenced, overlap, swapped_profiles)
from gravidec.model import CouplingProfile, DomainError, sequential_profiles


def shift_by_quadrature(g_of_t, omega, T, breaks=()):
    """-i int_0^T g(t) e^{-i w t} dt by adaptive quadrature, piece by piece."""
    edges = [0.0, *breaks, T]
    total = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        g = g_of_t(mid)
        re = quad(lambda t: math.cos(omega * t), a, b, epsabs=1e-13, epsrel=1e-12)[0]
        im = quad(lambda t: -math.sin(omega * t), a, b, epsabs=1e-13, epsrel=1e-12)[0]
        total += -1j * g * complex(re, im)
    return total


def test_full_revival():
    assert abs(displacement_free(1.0, 1.0, 2 * math.pi)) < 1e-15


def test_half_period_against_quadrature():
    val = displacement_free(1.0, 1.0, math.pi)
    ref = shift_by_quadrature(lambda t: 1.0, 1.0, math.pi)
    assert val == pytest.approx(ref, abs=1e-12)
    assert abs(val) == pytest.approx(2.0, rel=1e-15)


def test_short_time_leading_term():
    val = displacement_free(1.0, 1.0, 1e-6)
    assert val == pytest.approx(-1e-6j, rel=1e-6)
    assert val == pytest.approx(shift_by_quadrature(lambda t: 1.0, 1.0, 1e-6), rel=1e-9)


def test_free_domain_errors():
    with pytest.raises(DomainError):
        displacement_free(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        displacement_free(1.0, 1.0, -1.0)


@given(g=st.floats(-5, 5), w=st.floats(1e-3, 50), T=st.floats(0, 100))
def test_free_magnitude_identity(g, w, T):
    assert abs(displacement_free(g, w, T)) == pytest.approx(2 * abs(g / w * math.sin(w * T / 2)),
                                                            rel=1e-9, abs=1e-12)


@given(g=st.floats(-5, 5), w=st.floats(1e-3, 50), T=st.floats(0, 100))
def test_sequenced_without_swaps_is_free(g, w, T):
    assert displacement_sequenced(g, w, PulseSequence.free(T)) == pytest.approx(
        displacement_free(g, w, T), rel=1e-12, abs=1e-14)


def test_echo_full_period_magnitude_four():
    val = displacement_sequenced(1.0, 1.0, PulseSequence.echo(2 * math.pi))
    assert abs(val) == pytest.approx(4.0, rel=1e-14)
    ref = shift_by_quadrature(lambda t: 1.0 if t < math.pi else -1.0, 1.0, 2 * math.pi, (math.pi,))
    assert val == pytest.approx(ref, abs=1e-12)


def test_echo_kernel_random_draws():
    rng = np.random.default_rng(7)
    for _ in range(100):
        g, w, T = rng.uniform(-2, 2), rng.uniform(0.1, 5), rng.uniform(0.1, 10)
        val = abs(displacement_sequenced(g, w, PulseSequence.echo(T))) ** 2
        ref = 16 * (g / w) ** 2 * math.sin(w * T / 4) ** 4
        assert val == pytest.approx(ref, rel=1e-9)


def test_multi_pulse_against_quadrature():
    T, swaps = 3.7, (0.4, 1.9, 2.2)
    seq = PulseSequence(swaps, T)
    sign = lambda t: (-1.0) ** sum(t > s for s in swaps)  # noqa: E731
    assert displacement_sequenced(0.8, 2.3, seq) == pytest.approx(
        shift_by_quadrature(lambda t: 0.8 * sign(t), 2.3, T, swaps), abs=1e-12)


def test_pulse_sequence_validation():
    with pytest.raises(DomainError):
        PulseSequence((0.0,), 1.0)
    with pytest.raises(DomainError):
        PulseSequence((0.5, 0.4), 1.0)
    with pytest.raises(DomainError):
        PulseSequence((1.0,), 1.0)


def test_profile_zero_and_constant():
    assert displacement_profile(CouplingProfile.constant(0.0, 2.0), 1.3, 2.0) == 0
    assert displacement_profile(CouplingProfile.constant(0.7, 2.0), 1.3, 2.0) == pytest.approx(
        displacement_free(0.7, 1.3, 2.0), rel=1e-14)


def test_profile_outside_coverage():
    with pytest.raises(DomainError):
        displacement_profile(CouplingProfile.constant(1.0, 2.0), 1.0, 2.5)


def test_sequential_branches_coincide_at_4pi():
    T = 4 * math.pi
    p1, p2 = sequential_profiles(T)
    d1 = displacement_profile(p1, 1.0, T)
    d2 = displacement_profile(p2, 1.0, T)
    assert d1 == pytest.approx(d2, abs=1e-14)
    ref = shift_by_quadrature(lambda t: 0.0 if t < T / 2 else 1.0, 1.0, T, (T / 2,))
    assert d2 == pytest.approx(ref, abs=1e-12)


def test_sequential_branches_differ_at_3pi():
    T = 3 * math.pi
    p1, p2 = sequential_profiles(T)
    d1, d2 = displacement_profile(p1, 1.0, T), displacement_profile(p2, 1.0, T)
    assert d2 == pytest.approx(cmath.exp(-1j * T / 2) * d1, abs=1e-14)
    assert abs(d1 - d2) > 1.0


def test_profile_series_branch_matches_closed_form():
    # |w dt| just below and above the series threshold must agree.
    for dt in (0.9e-8, 1.1e-8):
        prof = CouplingProfile.constant(1.0, dt)
        assert displacement_profile(prof, 1.0, dt) == pytest.approx(-1j * dt - 0.5 * dt**2, rel=1e-15)


@given(t_split=st.floats(0.01, 0.99), w=st.floats(0.05, 10), g=st.floats(-3, 3))
def test_concatenation(t_split, w, g):
    T = 5.0
    t = t_split * T
    whole = displacement_free(g, w, T)
    first = displacement_free(g, w, t)
    second = cmath.exp(-1j * w * t) * displacement_free(g, w, T - t)
    assert whole == pytest.approx(first + second, abs=1e-12)


def test_overlap_basic_values():
    assert overlap(0.3 - 0.2j, 0.3 - 0.2j) == pytest.approx(1.0)
    assert overlap(0, 2j) == pytest.approx(math.exp(-2))


@given(ar=st.floats(-3, 3), ai=st.floats(-3, 3), dr=st.floats(-2, 2), di=st.floats(-2, 2))
def test_overlap_magnitude_alpha_independent(ar, ai, dr, di):
    a, d = complex(ar, ai), complex(dr, di)
    assert abs(overlap(a + d, a - d)) == pytest.approx(math.exp(-2 * abs(d) ** 2), rel=1e-12, abs=1e-300)


@given(br=st.floats(-3, 3), bi=st.floats(-3, 3), cr=st.floats(-3, 3), ci=st.floats(-3, 3))
def test_overlap_bounded(br, bi, cr, ci):
    b, c = complex(br, bi), complex(cr, ci)
    mag = abs(overlap(b, c))
    assert mag <= 1.0 + 1e-15
    assert mag == pytest.approx(math.exp(-abs(b - c) ** 2 / 2), rel=1e-12, abs=1e-300)


def test_dynamical_phase_series_continuity():
    # The self phase g^2 (w dt - sin(w dt)) / w^2 switches to a series at small w dt.
    for w in (0.99e-2, 1.01e-2):
        _, phi = accumulate(CouplingProfile.constant(1.0, 1.0).segments, w)
        x = w
        assert float(phi) == pytest.approx((x - math.sin(x)) / w**2, rel=1e-7)


def test_swapped_profiles_echo_flips_sign():
    p1, p2 = CouplingProfile.constant(1.0, 2.0), CouplingProfile.constant(-1.0, 2.0)
    e1, e2 = swapped_profiles(p1, p2, PulseSequence.echo(2.0))
    assert [s.g for s in e1.segments] == [1.0, -1.0]
    assert [s.g for s in e2.segments] == [-1.0, 1.0]
