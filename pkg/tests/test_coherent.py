import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import iv

from khqa.algebra import Realization
from khqa.coherent import (amplitudes_by_recurrence, auto_displacement, bessel_i,
                           check_halting_precondition, choose_dim, closed_form_bg, density,
                           eigen_residual, log_bessel_i)
from khqa.errors import ParameterError, TailToleranceError

ISW = Realization.isw()


def series_bessel(nu, x, terms=20):
    """Plain forward power series, independent of the log-space implementation."""
    return sum((x / 2) ** (2 * m + nu) / (math.factorial(m) * math.gamma(m + nu + 1)) for m in range(terms))


def test_bessel_small_cases():
    assert bessel_i(0, 0) == 1.0
    assert bessel_i(2, 2) == pytest.approx(0.688948, abs=5e-7)
    assert bessel_i(2, 2) == pytest.approx(series_bessel(2, 2), rel=1e-14)
    assert bessel_i(2, 2) == pytest.approx(iv(2, 2), rel=1e-13)


def test_bessel_two_summation_orders():
    forward = series_bessel(1.54, 3.0, 40)
    terms = [(1.5) ** (2 * m + 1.54) / (math.factorial(m) * math.gamma(m + 2.54)) for m in range(40)]
    backward = math.fsum(reversed(terms))
    assert forward == pytest.approx(backward, rel=1e-12)
    assert bessel_i(1.54, 3.0) == pytest.approx(backward, rel=1e-12)


@given(st.floats(0, 30), st.floats(1e-3, 200))
@settings(max_examples=100, deadline=None)
def test_log_bessel_matches_scipy(nu, x):
    ref = iv(nu, x)
    if np.isfinite(ref) and ref > 1e-300:
        assert log_bessel_i(nu, x) == pytest.approx(math.log(ref), rel=1e-11, abs=1e-11)


def test_bessel_domain():
    with pytest.raises(ParameterError):
        log_bessel_i(-1, 1.0)
    with pytest.raises(ParameterError):
        log_bessel_i(1, -1.0)


def test_zero_displacement_is_vacuum():
    s = amplitudes_by_recurrence(ISW, 0, 8)
    assert s.amplitudes[0] == 1 and not np.any(s.amplitudes[1:])
    rep = density(s)
    assert (rep.max_index, rep.max_prob, rep.dominant) == (0, 1.0, True)


def test_isw_matches_closed_form():
    z = 1.5
    s = amplitudes_by_recurrence(ISW, z, 32)
    bess = series_bessel(2, 2 * z, 60)
    for n in range(32):
        ref = z / math.sqrt(bess) * z**n / math.sqrt(math.factorial(n) * math.factorial(n + 2))
        if ref**2 > 1e-14:
            assert abs(s.amplitudes[n] - ref) <= 1e-10 * abs(ref)


def test_isw_vacuum_probability():
    s = amplitudes_by_recurrence(ISW, 1.0, 16)
    assert s.probabilities[0] == pytest.approx(1 / (2 * iv(2, 2)), rel=1e-12)
    assert s.probabilities[0] == pytest.approx(0.7257437064705, abs=1e-12)
    ok, rep = check_halting_precondition(s)
    assert not ok and rep.dominant


def test_sho_poisson():
    s = amplitudes_by_recurrence(Realization.sho(), 1.0, 32)
    assert s.probabilities[0] == pytest.approx(math.exp(-1), rel=1e-12)
    pois = [math.exp(-1) / math.factorial(n) for n in range(32)]
    assert np.allclose(s.probabilities, pois, rtol=1e-10, atol=0)
    assert math.fsum(s.probabilities) == pytest.approx(1 - s.tail_mass, abs=1e-15)


def test_sho_poisson_mean():
    alpha = 2.3
    dim = choose_dim(Realization.sho(), alpha, tail_tol=1e-12)
    s = amplitudes_by_recurrence(Realization.sho(), alpha, dim, tail_tol=1e-12)
    assert np.dot(np.arange(dim), s.probabilities) == pytest.approx(alpha**2, abs=1e-8)


@pytest.mark.parametrize("r,z", [
    (Realization.laguerre(2), 1.2), (Realization.laguerre(0.5), 0.8 + 0.6j), (Realization.icw(), 2.0),
    (Realization.pcw(), 1.1), (Realization.ptp(2, 2), 1.7), (Realization.sho(), 1.5 - 0.5j),
    (Realization.hp(0.5), 0.5), (Realization.hp(1), 0.5j), (Realization.hp(2.5), 0.3),
    (Realization.generic(1.25, perelomov=True), 0.45),
], ids=lambda v: v.label() if isinstance(v, Realization) else str(v))
def test_recurrence_matches_closed_form(r, z):
    dim = 48
    s = amplitudes_by_recurrence(r, z, dim)
    for n in range(dim):
        ref = closed_form_bg(r, z, n)
        if abs(ref) ** 2 > 1e-14:
            assert abs(s.amplitudes[n] - ref) <= 1e-10 * abs(ref)


def test_hp_binomial_closed_form_values():
    # (1 - |z|^2)^k binom(2k + n - 1, n)^(1/2) z^n for k = 1, z = 0.5
    for n in range(6):
        ref = 0.75 * math.sqrt(math.comb(n + 1, n)) * 0.5**n
        assert closed_form_bg(Realization.hp(1), 0.5, n) == pytest.approx(ref, rel=1e-13)


def test_perelomov_requires_unit_disk():
    with pytest.raises(ParameterError):
        amplitudes_by_recurrence(Realization.hp(1), 1.0, 16)
    with pytest.raises(ParameterError):
        closed_form_bg(Realization.hp(1), 1.2, 0)


def test_tail_tolerance_enforced():
    with pytest.raises(TailToleranceError):
        amplitudes_by_recurrence(ISW, 3.0, 4)
    with pytest.raises(TailToleranceError):
        amplitudes_by_recurrence(ISW, 1.0, 6, tail_tol=1e-12)


def test_tail_bound_dominates_tail_mass():
    for z in (0.5, 1.0, 2.0, 3.0):
        dim = choose_dim(ISW, z)
        s = amplitudes_by_recurrence(ISW, z, dim)
        assert s.tail_mass <= s.tail_bound <= 1e-10


def test_choose_dim_is_power_of_two():
    for z in (0.2, 1.0, 4.0):
        d = choose_dim(ISW, z)
        assert d & (d - 1) == 0
        if d > 2:
            with pytest.raises(TailToleranceError):
                amplitudes_by_recurrence(ISW, z, d // 2)


@pytest.mark.parametrize("r,z", [(ISW, 1.0), (Realization.sho(), 1.0), (Realization.hp(0.5), 0.5),
                                 (Realization.laguerre(2), 2.0), (Realization.icw(), 1.5j)],
                         ids=lambda v: v.label() if isinstance(v, Realization) else str(v))
def test_eigen_residual_at_generous_dim(r, z):
    s = amplitudes_by_recurrence(r, z, 32)
    assert eigen_residual(s) <= max(1e-8, 3 * s.tail_mass)


def test_eigen_residual_dominated_by_edge_amplitude():
    # on the truncated grid the residual is |z| |C_{dim-1}| exactly
    s = amplitudes_by_recurrence(ISW, 1.0, 8)
    assert eigen_residual(s) == pytest.approx(abs(s.amplitudes[-1]), rel=1e-12)


def test_precondition_examples():
    ok, _ = check_halting_precondition(amplitudes_by_recurrence(Realization.sho(), 0.1, 8))
    assert not ok
    ok, rep = check_halting_precondition(amplitudes_by_recurrence(ISW, 2.0, 16))
    assert ok and rep.max_prob < 0.5
    assert not check_halting_precondition(amplitudes_by_recurrence(ISW, 0, 4))[0]


def test_phase_of_amplitudes():
    z = 1.2 * cmath.exp(0.7j)
    s = amplitudes_by_recurrence(ISW, z, 16)
    for n in range(5):
        assert cmath.phase(s.amplitudes[n] * cmath.exp(-0.7j * n)) == pytest.approx(0, abs=1e-12)


@given(st.floats(0.05, 3.0), st.floats(-math.pi, math.pi))
@settings(max_examples=60, deadline=None)
def test_gauge_invariance(r, phi):
    a = amplitudes_by_recurrence(ISW, r, 32).probabilities
    b = amplitudes_by_recurrence(ISW, r * cmath.exp(1j * phi), 32).probabilities
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


@given(st.floats(0.01, math.sqrt(3)))
@settings(max_examples=60, deadline=None)
def test_isw_vacuum_dominance_below_threshold(r):
    p = amplitudes_by_recurrence(ISW, r, 32).probabilities
    assert np.all(p <= p[0] * (1 + 1e-12))


def test_isw_vacuum_dominance_breaks_above_sqrt3():
    # P_1 / P_0 = |z|^2 / 3, so the vacuum stops dominating once |z| > sqrt(3)
    p = amplitudes_by_recurrence(ISW, 2.0, 32).probabilities
    assert p[1] / p[0] == pytest.approx(4 / 3, rel=1e-12)


def test_auto_displacement():
    z = auto_displacement([ISW], [16])
    assert density(amplitudes_by_recurrence(ISW, z, 16)).max_prob <= 0.45
    assert density(amplitudes_by_recurrence(ISW, z - 0.01, 16)).max_prob > 0.45
    z2 = auto_displacement([ISW, ISW], [8, 8])
    prod = density(amplitudes_by_recurrence(ISW, z2, 8)).max_prob ** 2
    assert prod <= 0.45 < density(amplitudes_by_recurrence(ISW, z2 - 0.01, 8)).max_prob ** 2
