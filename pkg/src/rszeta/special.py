"""Gamma-function layer and the analytic kernels of the approximate
functional equation.

Everything here works on Python complex scalars. The gamma quotient

    X(s) = (2 pi)^(4s-2) Gamma(kappa-s) Gamma(1-s) / (Gamma(s+kappa-1) Gamma(s))

is always handled through ``log_x_factor``, which is the sum of four
principal-branch log-gamma values. All four gamma arguments have positive
real part inside the strip 0 < Re s < 1, so this logarithm is analytic
there and continuous along vertical lines; X(1/2) = 1 anchors it at 0.
Its imaginary part grows like 4 t log t, so phases are never recovered
with ``cmath.phase`` of an exponential.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)
HALF_LOG_2PI = 0.5 * LOG_2PI

STIRLING_TERMS = 8
SHIFT_THRESHOLD = 10.0


class DomainError(ValueError):
    """Argument lies on a pole or outside the stated domain."""


class ConsistencyError(ArithmeticError):
    """An internal identity failed beyond its tolerance."""


# ---------------------------------------------------------------------------
# Bernoulli numbers and polynomials


@lru_cache(maxsize=None)
def bernoulli_numbers(m: int) -> tuple:
    """B_0..B_m as Fractions, with B_1 = -1/2."""
    b = [Fraction(0)] * (m + 1)
    b[0] = Fraction(1)
    for k in range(1, m + 1):
        b[k] = -sum(math.comb(k + 1, j) * b[j] for j in range(k)) / (k + 1)
    return tuple(b)


def bernoulli_polynomial(j: int, x: float) -> float:
    """B_j(x) = sum_k C(j, k) B_k x^(j-k)."""
    b = bernoulli_numbers(j)
    return sum(math.comb(j, k) * float(b[k]) * x ** (j - k) for k in range(j + 1))


def stirling_log_gamma(z: complex, terms: int, shift: float = 0.0) -> complex:
    """Asymptotic series for log Gamma(z + shift) with ``terms`` corrections.

    log Gamma(z+b) ~ (z+b-1/2) log z - z + log(2 pi)/2
                     + sum_{j=1}^{terms} (-1)^(j+1) B_{j+1}(b) / (j (j+1) z^j)

    Only sensible for |z| large and |arg z| < pi.
    """
    z = complex(z)
    out = (z + shift - 0.5) * cmath.log(z) - z + HALF_LOG_2PI
    zinv = 1.0 / z
    zpow = zinv
    for j in range(1, terms + 1):
        bj = bernoulli_polynomial(j + 1, shift)
        if bj:
            out += (-1) ** (j + 1) * bj / (j * (j + 1)) * zpow
        zpow *= zinv
    return out


@lru_cache(maxsize=None)
def _even_bernoulli_coeffs(terms: int) -> tuple:
    # B_{2k} / (2k (2k-1)) for the shift-free series
    b = bernoulli_numbers(2 * terms)
    return tuple(float(b[2 * k]) / (2 * k * (2 * k - 1)) for k in range(1, terms + 1))


@lru_cache(maxsize=None)
def _digamma_coeffs(terms: int) -> tuple:
    b = bernoulli_numbers(2 * terms)
    return tuple(float(b[2 * k]) / (2 * k) for k in range(1, terms + 1))


def _check_pole(z: complex):
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"Gamma has a pole at {z}")


def _shift_count(z: complex) -> int:
    m = 0
    while abs(z + m) < SHIFT_THRESHOLD or (z.real + m) < 0.5:
        m += 1
    return m


# ---------------------------------------------------------------------------
# log Gamma and digamma


def log_gamma(s: complex, terms: int = STIRLING_TERMS) -> complex:
    """Principal branch of log Gamma(s).

    For |s| < 10 (or Re s < 1/2) the argument is first moved up with
    Gamma(s+1) = s Gamma(s), subtracting the accumulated logarithms. The
    Stirling series then uses B_2, B_4, ..., B_{2 terms}.
    """
    z = complex(s)
    _check_pole(z)
    m = _shift_count(z)
    acc = 0j
    for k in range(m):
        acc += cmath.log(z + k)
    w = z + m
    zinv = 1.0 / w
    zinv2 = zinv * zinv
    corr = 0j
    zpow = zinv
    for coeff in _even_bernoulli_coeffs(terms):
        corr += coeff * zpow
        zpow *= zinv2
    return (w - 0.5) * cmath.log(w) - w + HALF_LOG_2PI + corr - acc


def digamma(s: complex, terms: int = STIRLING_TERMS) -> complex:
    """psi(s) = Gamma'(s)/Gamma(s) via recurrence shift and asymptotic series."""
    z = complex(s)
    _check_pole(z)
    m = _shift_count(z)
    acc = 0j
    for k in range(m):
        acc += 1.0 / (z + k)
    w = z + m
    zinv2 = 1.0 / (w * w)
    corr = 0j
    zpow = zinv2
    for coeff in _digamma_coeffs(terms):
        corr += coeff * zpow
        zpow *= zinv2
    return cmath.log(w) - 0.5 / w - corr - acc


# ---------------------------------------------------------------------------
# The gamma quotient X(s)


def log_x_factor(s: complex, kappa: int = 12) -> complex:
    """Continuous logarithm of X(s); exactly 0 at s = 1/2."""
    s = complex(s)
    return (
        (4.0 * s - 2.0) * LOG_2PI
        + (log_gamma(kappa - s) - log_gamma(s + (kappa - 1)))
        + (log_gamma(1.0 - s) - log_gamma(s))
    )


def x_factor(s: complex, kappa: int = 12) -> complex:
    return cmath.exp(log_x_factor(s, kappa))


def _asymptotic_log_x(s: complex, kappa: int) -> complex:
    s = complex(s)
    t = s.imag
    if t < 3.0:
        raise DomainError(f"asymptotic form needs t >= 3, got t={t}")
    lt = math.log(t / (2.0 * math.pi))
    phase = 4.0 * t - 4.0 * t * lt + (1 - kappa) * math.pi
    return complex((2.0 - 4.0 * s.real) * lt, phase)


def x_factor_asymptotic(s: complex, kappa: int = 12) -> complex:
    """Leading term (t/2pi)^(2-4 sigma) exp(4it - 4it log(t/2pi) + (1-kappa) pi i)."""
    la = _asymptotic_log_x(s, kappa)
    return math.exp(la.real) * cmath.exp(1j * reduce_phase(la.imag))


def reduce_phase(theta: float) -> float:
    """theta mod 2 pi in (-pi, pi]."""
    r = math.remainder(theta, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


# ---------------------------------------------------------------------------
# tau(t) and the kernel Phi


def log_tau(t: float, kappa: int = 12) -> float:
    """log tau(t) = -X'/X(1/2 + it) from four digamma values.

    The sum is formed from two conjugate pairs, so its imaginary part is a
    pure rounding residue; it is checked and discarded.
    """
    if t < 3.0:
        raise DomainError(f"tau(t) needs t >= 3, got t={t}")
    s = complex(0.5, t)
    pair_kappa = digamma(kappa - s) + digamma(s + (kappa - 1))
    pair_one = digamma(1.0 - s) + digamma(s)
    total = -4.0 * LOG_2PI + pair_kappa + pair_one
    if abs(total.imag) > 1e-12 * max(1.0, abs(total.real)):
        raise ConsistencyError(f"log tau({t}) has imaginary part {total.imag}")
    return total.real


def tau_of_t(t: float, kappa: int = 12) -> float:
    return math.exp(log_tau(t, kappa))


def _expm1(z: complex) -> complex:
    # exp(z) - 1 without cancellation for small |z|
    a, b = z.real, z.imag
    re = math.expm1(a) * math.cos(b) - 2.0 * math.sin(0.5 * b) ** 2
    im = math.exp(a) * math.sin(b)
    return complex(re, im)


def phi_kernel(w: complex, s: complex, tau: float, kappa: int = 12) -> complex:
    """Phi(w; s, tau) = tau^(w-s) X(w) - X(s).

    Evaluated as X(s) * expm1((w-s) log tau + log X(w) - log X(s)) so that
    the quadratic vanishing at w = s survives in floating point.
    """
    w, s = complex(w), complex(s)
    if w == s:
        return 0j
    lxs = log_x_factor(s, kappa)
    expo = (w - s) * math.log(tau) + (log_x_factor(w, kappa) - lxs)
    return cmath.exp(lxs) * _expm1(expo)


# ---------------------------------------------------------------------------
# Smooth cutoff


@dataclass(frozen=True)
class SmoothWeight:
    """C-infinity cutoff rho with rho = 1 below 1/b and rho = 0 above b."""

    b: float = 2.0
    profile: str = "exp-bump"

    def __post_init__(self):
        if not self.b > 1.0:
            raise DomainError(f"cutoff edge b must exceed 1, got {self.b}")
        if self.profile != "exp-bump":
            raise DomainError(f"unknown transition profile {self.profile!r}")


def _bump(v):
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = np.exp(-1.0 / v[pos])
    return out


def rho_weight(x, weight: SmoothWeight = SmoothWeight()):
    """rho(x) = 1 - H(log x / log b) with the exp(-1/v) smooth step H.

    Accepts scalars or arrays; returns the same shape. rho(x) + rho(1/x) = 1
    holds by construction because H(u) + H(-u) = 1.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0):
        raise DomainError("rho is defined for x > 0 only")
    u = np.log(arr) / math.log(weight.b)
    lo = _bump(1.0 - u)
    hi = _bump(1.0 + u)
    out = lo / (lo + hi)
    return float(out) if out.ndim == 0 else out
