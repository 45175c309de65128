import cmath
import math
import random

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import log_x_oracle
from rszeta.special import (
    ConsistencyError,
    DomainError,
    SmoothWeight,
    bernoulli_numbers,
    digamma,
    log_gamma,
    log_tau,
    log_x_factor,
    phi_kernel,
    reduce_phase,
    rho_weight,
    stirling_log_gamma,
    tau_of_t,
    x_factor,
    x_factor_asymptotic,
)

EULER_GAMMA = 0.5772156649015329


def rel(a, b):
    return abs(a - b) / abs(b)


# --- log gamma -------------------------------------------------------------


def test_bernoulli_numbers():
    b = bernoulli_numbers(12)
    assert (b[0], b[1], b[2], b[4], b[12]) == (1, -0.5, mp.mpf(1) / 6, -mp.mpf(1) / 30, mp.mpf(-691) / 2730)


def test_log_gamma_special_values():
    assert log_gamma(1) == 0
    assert abs(log_gamma(2)) < 1e-15
    assert abs(log_gamma(0.5) - 0.5 * math.log(math.pi)) < 2e-15


def test_log_gamma_against_mpmath():
    pts = [10 + 10j, 0.3 + 0.1j, -2.5 + 1j, 3.7 - 80j, 150 + 200j, 12 - 0.5j]
    for s in pts:
        want = complex(mp.loggamma(s))
        assert abs(log_gamma(s) - want) <= 1e-12 * max(1.0, abs(want)), s


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 100.0), st.floats(0.0, 2 * math.pi))
def test_log_gamma_recurrence(r, theta):
    s = cmath.rect(r, theta)
    if abs(s.imag) < 1e-6 and s.real < 0:
        s += 0.5j  # stay off the negative real axis poles and cut
    lhs = log_gamma(s + 1)
    rhs = log_gamma(s) + cmath.log(s)
    # equality holds modulo 2 pi i on the principal branch
    diff = lhs - rhs
    k = round(diff.imag / (2 * math.pi))
    assert abs(diff - 2j * math.pi * k) <= 1e-12 * max(1.0, abs(lhs))


def test_stirling_general_shift_matches_mpmath():
    z = 40 + 25j
    for b in (0.0, 0.5, 1.0):
        want = complex(mp.loggamma(z + b))
        assert abs(stirling_log_gamma(z, 8, b) - want) < 1e-12 * abs(want)


def test_poles_rejected():
    for s in (0, -1, -7):
        with pytest.raises(DomainError):
            log_gamma(s)
        with pytest.raises(DomainError):
            digamma(s)


# --- digamma ---------------------------------------------------------------


def test_digamma_one_against_harmonic_oracle():
    n = 10**6
    harmonic = math.fsum(1.0 / k for k in range(1, n + 1))
    gamma = harmonic - math.log(n) - 1 / (2 * n) + 1 / (12 * n * n)
    assert abs(gamma - EULER_GAMMA) < 1e-12
    assert abs(digamma(1) + gamma) < 1e-9


def test_digamma_recurrence_and_symmetry():
    s = 3.7 + 2.1j
    assert abs(digamma(s + 1) - digamma(s) - 1 / s) < 1e-12
    for s in (0.5 + 30j, 11.5 - 100j, 0.2 + 3j):
        assert abs(digamma(s.conjugate()) - digamma(s).conjugate()) < 1e-14
        assert rel(digamma(s), complex(mp.digamma(s))) < 1e-13


# --- X(s) ------------------------------------------------------------------


def test_x_half_is_one():
    assert log_x_factor(0.5) == 0
    assert x_factor(0.5) == 1


def test_x_reciprocity_and_unimodularity():
    s = 0.7 + 50j
    assert abs(x_factor(s) * x_factor(1 - s) - 1) < 1e-10
    for t in (10.0, 100.0, 1000.0, 1e4):
        assert abs(abs(x_factor(0.5 + 1j * t)) - 1) < 1e-10


def test_x_conjugate_symmetry():
    for s in (0.3 + 20j, 0.9 + 333j, 0.5 + 7j):
        assert rel(x_factor(s.conjugate()), x_factor(s).conjugate()) < 1e-12


def test_log_x_against_mpmath():
    rng = random.Random(7)
    for _ in range(25):
        s = complex(rng.uniform(0, 1), rng.uniform(5, 1000))
        want = complex(log_x_oracle(s))
        assert abs(log_x_factor(s) - want) < 1e-13 * abs(want)


def test_asymptotic_modulus_exact():
    for sigma, t in ((0.5, 50.0), (0.75, 123.0), (0.9, 700.0)):
        got = abs(x_factor_asymptotic(complex(sigma, t)))
        assert got == pytest.approx((t / (2 * math.pi)) ** (2 - 4 * sigma), rel=1e-14)


def _asym_dev(sigma, t):
    s = complex(sigma, t)
    return abs(x_factor(s) / x_factor_asymptotic(s) - 1)


def test_asymptotic_deviation_is_order_one_over_t():
    # t * deviation approaches about 120.8 from below (mpmath check below);
    # 125 / t is therefore a uniform envelope for t >= 50
    for t in (50.0, 100.0, 500.0, 1000.0):
        assert t * _asym_dev(0.5, t) <= 125.0
    assert 500 * _asym_dev(0.5, 500) == pytest.approx(1000 * _asym_dev(0.5, 1000), rel=0.01)
    for sigma in (0.5, 0.75):
        for t in (50.0, 100.0, 200.0):
            assert t * _asym_dev(sigma, t) <= 125.0


def test_asymptotic_deviation_matches_oracle():
    for sigma, t in ((0.5, 100.0), (0.75, 200.0)):
        s = complex(sigma, t)
        with mp.workdps(40):
            lt = mp.log(mp.mpf(t) / (2 * mp.pi))
            asym = (2 - 4 * sigma) * lt + 1j * (4 * t - 4 * t * lt - 11 * mp.pi)
            want = float(abs(mp.exp(log_x_oracle(s) - asym) - 1))
        assert _asym_dev(sigma, t) == pytest.approx(want, rel=1e-8)


def test_asymptotic_phase_close_at_500():
    s = complex(0.5, 500.0)
    d = reduce_phase(cmath.phase(x_factor(s)) - cmath.phase(x_factor_asymptotic(s)))
    assert abs(d) <= 125.0 / 500.0


def test_asymptotic_rejects_small_t():
    with pytest.raises(DomainError):
        x_factor_asymptotic(0.5 + 2j)


def test_reduce_phase_range():
    for theta in (-1e6, -math.pi, 0.0, math.pi, 3 * math.pi, 12345.678):
        r = reduce_phase(theta)
        assert -math.pi < r <= math.pi
        assert math.isclose(math.cos(r), math.cos(theta), abs_tol=1e-9)


# --- tau(t) ----------------------------------------------------------------


def _tau_dev(t):
    return tau_of_t(t) / (t / (2 * math.pi)) ** 4 - 1


def test_tau_asymptotics():
    c = 50.0**2 * abs(_tau_dev(50.0))
    for t in (10.0, 100.0, 1000.0):
        assert abs(_tau_dev(t)) <= c / t**2
    assert tau_of_t(100) < tau_of_t(200)


def test_tau_matches_derivative_of_log_x():
    t, h = 100.0, 1e-4
    deriv = (log_x_factor(complex(0.5, t + h)) - log_x_factor(complex(0.5, t - h))) / (2 * h)
    fd = (1j * deriv).real
    assert abs(fd - log_tau(t)) < 1e-6 * abs(log_tau(t))
    assert abs((1j * deriv).imag) < 1e-6


def test_tau_rejects_small_t():
    with pytest.raises(DomainError):
        tau_of_t(2.0)


def test_consistency_error_is_arithmetic():
    assert issubclass(ConsistencyError, ArithmeticError)


# --- Phi -------------------------------------------------------------------


def test_phi_vanishes_at_s():
    s = 0.5 + 200j
    assert phi_kernel(s, s, tau_of_t(200)) == 0


def test_phi_quadratic_vanishing():
    t = 200.0
    s, tau = complex(0.5, t), tau_of_t(t)
    r = [abs(phi_kernel(s + 1j * d, s, tau)) / d**2 for d in (1e-2, 1e-3, 1e-4)]
    assert r[0] / r[1] == pytest.approx(1, rel=0.05)
    assert r[1] / r[2] == pytest.approx(1, rel=0.05)
    lin = [abs(phi_kernel(s + 1j * d, s, tau)) / d for d in (1e-3, 1e-4)]
    assert lin[0] / lin[1] == pytest.approx(10, rel=0.05)


def test_phi_bound_on_critical_line():
    t = 200.0
    s, tau = complex(0.5, t), tau_of_t(t)
    c = t * abs(phi_kernel(s + 0.01j, s, tau)) / 0.01**2
    assert c == pytest.approx(2.0, rel=0.05)
    # the cubic term lifts the ratio by under 1% for v near -5
    for v in np.linspace(-math.sqrt(t), math.sqrt(t), 41):
        if v:
            assert abs(phi_kernel(s + 1j * v, s, tau)) <= 1.01 * c * v * v / t


def test_phi_matches_direct_definition():
    s, w = 0.6 + 40j, 0.55 + 41j
    tau = tau_of_t(40.0)
    direct = tau ** (w - s) * x_factor(w) - x_factor(s)
    assert abs(phi_kernel(w, s, tau) - direct) < 1e-12 * abs(direct)


# --- rho -------------------------------------------------------------------


def test_rho_examples():
    assert rho_weight(1.0) == 0.5
    assert rho_weight(2.0) == 0.0
    assert rho_weight(0.5) == 1.0
    assert abs(rho_weight(1.3) + rho_weight(1 / 1.3) - 1) <= 1e-15


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1.05, 10.0))
def test_rho_properties(x, b):
    w = SmoothWeight(b)
    r = rho_weight(x, w)
    assert 0.0 <= r <= 1.0
    assert abs(r + rho_weight(1 / x, w) - 1) <= 1e-15
    if x >= b:
        assert r == 0.0
    if x <= 1 / b:
        assert r == 1.0


def test_rho_monotone_and_smooth():
    for b in (1.5, 2.0, 4.0):
        w = SmoothWeight(b)
        x = np.linspace(1 / b, b, 4001)
        r = rho_weight(x, w)
        assert np.all(np.diff(r) <= 0)
        h = 1e-4
        d1 = (rho_weight(x[1:-1] + h, w) - rho_weight(x[1:-1] - h, w)) / (2 * h)
        d2 = (rho_weight(x[1:-1] + h, w) - 2 * r[1:-1] + rho_weight(x[1:-1] - h, w)) / h**2
        assert np.max(np.abs(d1)) <= 10 / math.log(b)
        assert np.max(np.abs(d2)) <= 100 / math.log(b) ** 2


def test_rho_domain():
    with pytest.raises(DomainError):
        rho_weight(0.0)
    with pytest.raises(DomainError):
        SmoothWeight(1.0)
    with pytest.raises(DomainError):
        SmoothWeight(2.0, profile="cosine")
