"""Phase-accurate Dirichlet polynomial kernels.

Phases t log n are formed in double-double arithmetic (Dekker products,
Knuth two-sums) and reduced mod 2 pi before any trig call, so the phase
error stays near 1e-16 rad even when t log n is far beyond 2^26.
Real and imaginary parts are accumulated with ``math.fsum``.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI_HI = 2.0 * math.pi
TWO_PI_LO = 2.4492935982947064e-16  # 2 pi - TWO_PI_HI
COMPENSATE_ABOVE = 2.0**26

_SPLITTER = 134217729.0  # 2^27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """p + e == a * b exactly (barring overflow)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def log_dd(x):
    """log x as an unevaluated sum hi + lo.

    The low word comes from extended precision where the platform has it;
    otherwise it is 0 and the result degrades to plain double.
    """
    x = np.asarray(x, dtype=np.float64)
    hi = np.log(x)
    lo = (np.log(x.astype(np.longdouble)) - hi.astype(np.longdouble)).astype(np.float64)
    return hi, lo


def reduce_dd(hi, lo):
    """(hi + lo) mod 2 pi, mapped to about [-pi, pi]."""
    k = np.rint(np.asarray(hi) / TWO_PI_HI)
    kh, kl = two_prod(k, TWO_PI_HI)
    return ((hi - kh) - kl) + (lo - k * TWO_PI_LO)


def scaled_log_phase(t: float, n) -> np.ndarray:
    """t * log n reduced mod 2 pi, compensated."""
    lh, ll = log_dd(n)
    ph, pl = two_prod(np.float64(t), lh)
    return reduce_dd(ph, pl + t * ll)


def dirichlet_sum(weights: np.ndarray, s: complex, start: int = 1) -> complex:
    """sum_k weights[k] * n_k^(-s) with n_k = start + k.

    Terms are formed in ascending n; the phase t log n switches to the
    compensated path once it can exceed 2^26.
    """
    if len(weights) == 0:
        return 0j
    sigma, t = s.real, s.imag
    n = np.arange(start, start + len(weights), dtype=np.float64)
    logn = np.log(n)
    mag = weights * np.exp(-sigma * logn)
    if abs(t) * logn[-1] > COMPENSATE_ABOVE:
        phase = scaled_log_phase(t, n)
    else:
        phase = t * logn
    re = math.fsum(mag * np.cos(phase))
    im = -math.fsum(mag * np.sin(phase))
    return complex(re, im)
