"""Evaluation of Z(s) = sum c_n n^-s inside the critical strip.

Three routes are provided:

* ``z_direct``: the truncated series plus a C N^(1-s)/(s-1) tail, with a
  partial-summation error bound driven by the |Delta(x)| <= K x^(3/5)
  constant. Valid for Re s >= 0.7; used as the reference.
* ``z_afe``: the sharp approximate functional equation with cutoffs x and
  y, x y = tau(t), and correction terms C1 x^(1-s)/(1-s), C2 X(s) y^s/s.
  The contour-integral remainder is not computed; its size is charged to
  the error budget.
* ``z_afe_smoothed``: the same two sums with the smooth weight rho.

On top of these sit the Hardy-type function Z(1/2+it) X^(-1/2)(1/2+it), its
cosine-sum approximation, and calibration of C, K, C1, C2.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from ._numerics import dirichlet_sum, log_dd, reduce_dd, two_prod, two_sum
from .coeffs import CoefficientTable
from .special import (
    ConsistencyError,
    SmoothWeight,
    log_x_factor,
    rho_weight,
    tau_of_t,
)

logger = logging.getLogger(__name__)

EPSILON = 0.05
HUXLEY_MU_HALF = 32 / 205
DIRECT_MIN_SIGMA = 0.7
RANKIN_SELBERG_EXPONENT = 0.6
XY_TOLERANCE = 1e-12


class EvaluationRangeError(ValueError):
    """The requested point is outside the method's range of validity."""


class TableLengthError(ValueError):
    """The coefficient table is too short for the requested sums."""


class CalibrationWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# Parameters and results


@dataclass(frozen=True)
class MuExponent:
    """Bound for mu(1/2), the growth exponent of zeta on the critical line.

    The default is Huxley's 32/205; 0 gives budgets under the Lindelof
    hypothesis.
    """

    mu_half: float = HUXLEY_MU_HALF

    def __post_init__(self):
        if not 0.0 <= self.mu_half <= 0.25:
            raise ValueError(f"mu(1/2) must lie in [0, 1/4], got {self.mu_half}")


@dataclass(frozen=True)
class AfeConfig:
    """Cutoffs and constants for the sharp approximate functional equation.

    ``h=None`` selects :func:`choose_h`. ``extra_budget`` is added to the
    reported error budget (used when calibration falls back to zero
    constants).
    """

    x: float
    y: float
    h: float | None = None
    c1: float = 0.0
    c2: float = 0.0
    extra_budget: float = 0.0

    def __post_init__(self):
        # a cutoff below 1 is legal and gives an empty sum
        if self.x <= 0.0 or self.y <= 0.0:
            raise ValueError(f"cutoffs must be positive, got x={self.x}, y={self.y}")
        if self.h is not None and not 0.0 < self.h <= 1.0:
            raise ValueError(f"h must lie in (0, 1], got {self.h}")

    @classmethod
    def for_t(
        cls,
        t: float,
        kappa: int = 12,
        split_ratio: float = 1.0,
        **kwargs,
    ) -> "AfeConfig":
        """Cutoffs with x y = tau(|t|) and x = split_ratio * y."""
        if split_ratio <= 0:
            raise ValueError("split ratio must be positive")
        tau = tau_of_t(abs(t), kappa)
        y = math.sqrt(tau / split_ratio)
        return cls(x=tau / y, y=y, **kwargs)

    def check_product(self, t: float, kappa: int) -> float:
        tau = tau_of_t(abs(t), kappa)
        if abs(self.x * self.y - tau) > XY_TOLERANCE * tau:
            raise ValueError(f"x*y = {self.x * self.y!r} differs from tau(t) = {tau!r}")
        return tau


@dataclass(frozen=True)
class AfeBreakdown:
    """Four main terms of the approximate functional equation."""

    sum_x: complex
    sum_y: complex
    corr_x: complex
    corr_y: complex
    value: complex
    error_budget: float

    @classmethod
    def from_terms(cls, sum_x, sum_y, corr_x, corr_y, error_budget) -> "AfeBreakdown":
        value = ((sum_x + sum_y) + corr_x) + corr_y
        return cls(sum_x, sum_y, corr_x, corr_y, value, error_budget)


@dataclass(frozen=True)
class BudgetTerms:
    """The two O-terms of the critical-line error bound with epsilon fixed."""

    moment: float
    lindelof: float

    @property
    def total(self) -> float:
        return self.moment + self.lindelof


@dataclass(frozen=True)
class DirectValue:
    value: complex
    error_bound: float
    n_terms: int


@dataclass(frozen=True)
class HardyPoint:
    t: float
    value: float
    imag_residue: float
    error_budget: float


@dataclass
class Calibration:
    """Numerical estimates of C, K and the correction constants C1, C2."""

    c_hat: float
    k_hat: float
    c1: float = 0.0
    c2: float = 0.0
    sigma: float = 0.9
    t_grid: tuple = (10.0, 15.0, 20.0, 25.0, 30.0)
    residuals: list = field(default_factory=list)
    residuals_uncorrected: list = field(default_factory=list)
    budget_inflation: float = 0.0
    tied: bool = True
    fallback: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["t_grid"] = list(self.t_grid)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Calibration":
        data = dict(data)
        data["t_grid"] = tuple(data.get("t_grid", ()))
        return cls(**data)

    def afe_config(self, t: float, kappa: int = 12, split_ratio: float = 1.0) -> AfeConfig:
        return AfeConfig.for_t(
            t,
            kappa,
            split_ratio,
            c1=self.c1,
            c2=self.c2,
            extra_budget=self.budget_inflation,
        )


# ---------------------------------------------------------------------------
# Sums


def _coeffs_upto(table: CoefficientTable, x: float) -> np.ndarray:
    """c_1..c_floor(x); n <= x is inclusive at integers."""
    if x < 1.0:
        return np.zeros(0)
    n = int(math.floor(x))
    if n > table.n_max:
        raise TableLengthError(f"need c_n up to n={n}, table has N={table.n_max}")
    return table.c_float[1 : n + 1]


def partial_sum(table: CoefficientTable, x: float, s: complex) -> complex:
    """sum_{n <= x} c_n n^-s."""
    return dirichlet_sum(_coeffs_upto(table, x), complex(s))


# ---------------------------------------------------------------------------
# Error budget and h


def choose_h(t: float, x: float) -> float:
    """h = t^(-11/16) (x^(1/2) + t^2 x^(-1/2))^(-1/4), clamped to (0, 1]."""
    if t < 3.0 or x < 1.0:
        raise EvaluationRangeError(f"choose_h needs t >= 3, x >= 1 (t={t}, x={x})")
    h = t ** (-11 / 16) * (math.sqrt(x) + t * t / math.sqrt(x)) ** (-0.25)
    return min(h, 1.0)


def error_budget(t: float, x: float, mu: MuExponent = MuExponent(), eps: float = EPSILON) -> BudgetTerms:
    """t^(eps-11/16) (x^(1/2) + t^2 x^(-1/2))^(3/4) and t^(1/2+mu(1/2)+eps)."""
    if t < 3.0:
        raise EvaluationRangeError(f"error budget needs t >= 3, got {t}")
    moment = t ** (eps - 11 / 16) * (math.sqrt(x) + t * t / math.sqrt(x)) ** 0.75
    lindelof = t ** (0.5 + mu.mu_half + eps)
    return BudgetTerms(moment=moment, lindelof=lindelof)


def _afe_budget(sigma: float, t: float, x: float, y: float, h: float, mu: MuExponent) -> float:
    te = t**EPSILON
    first = te * (x**-sigma + h * x ** (1 - sigma))
    second = t ** (2 + EPSILON - 4 * sigma) * (y ** (sigma - 1) + h * y**sigma)
    return first + second + error_budget(t, x, mu).total


# ---------------------------------------------------------------------------
# Direct series


def z_direct(
    s: complex,
    table: CoefficientTable,
    c_hat: float,
    k_hat: float,
    n_terms: int | None = None,
) -> DirectValue:
    """Truncated series with the main tail term and a rigorous-style bound.

    sum_{n<=N} c_n n^-s + C N^(1-s)/(s-1); by partial summation against
    Delta the remainder is at most |s| K N^(3/5-sigma)/(sigma-3/5) + K N^(3/5-sigma).
    """
    s = complex(s)
    if s.real < DIRECT_MIN_SIGMA:
        raise EvaluationRangeError(
            f"direct series needs Re s >= {DIRECT_MIN_SIGMA}, got {s.real}"
        )
    n = table.n_max if n_terms is None else n_terms
    if n > table.n_max:
        raise TableLengthError(f"N={n} exceeds table length {table.n_max}")
    head = partial_sum(table, n, s)
    tail = c_hat * cmath.exp((1 - s) * math.log(n)) / (s - 1)
    decay = n ** (RANKIN_SELBERG_EXPONENT - s.real)
    bound = abs(s) * k_hat * decay / (s.real - RANKIN_SELBERG_EXPONENT) + k_hat * decay
    return DirectValue(value=head + tail, error_bound=bound, n_terms=n)


# ---------------------------------------------------------------------------
# Sharp approximate functional equation


def _afe_terms(s: complex, cfg: AfeConfig, table: CoefficientTable, mu: MuExponent) -> AfeBreakdown:
    kappa = table.weight
    t = abs(s.imag)
    lx = log_x_factor(s, kappa)
    xs = cmath.exp(lx)
    sum_x = partial_sum(table, cfg.x, s)
    sum_y = xs * partial_sum(table, cfg.y, 1.0 - s)
    corr_x = cfg.c1 * cmath.exp((1 - s) * math.log(cfg.x)) / (1 - s) if cfg.c1 else 0j
    corr_y = cfg.c2 * cmath.exp(lx + s * math.log(cfg.y)) / s if cfg.c2 else 0j
    h = cfg.h if cfg.h is not None else choose_h(t, max(cfg.x, 1.0))
    budget = _afe_budget(s.real, t, cfg.x, cfg.y, h, mu) + cfg.extra_budget
    return AfeBreakdown.from_terms(sum_x, sum_y, corr_x, corr_y, budget)


def z_afe(
    s: complex,
    cfg: AfeConfig,
    table: CoefficientTable,
    mu: MuExponent = MuExponent(),
) -> AfeBreakdown:
    """Sharp approximate functional equation at s = sigma + it.

    Valid for 1/2 <= sigma <= 1 and |t| >= 3 (negative t through
    conjugation symmetry). Points with 0 <= sigma < 1/2 are routed through
    :func:`reflect_afe`.
    """
    s = complex(s)
    if abs(s.imag) < 3.0:
        raise EvaluationRangeError(f"approximate functional equation needs |t| >= 3, got {s.imag}")
    if not 0.0 <= s.real <= 1.0:
        raise EvaluationRangeError(f"sigma must lie in [0, 1], got {s.real}")
    if s.real < 0.5:
        return reflect_afe(s, cfg, table, mu)
    cfg.check_product(s.imag, table.weight)
    return _afe_terms(s, cfg, table, mu)


def reflect_afe(
    s: complex,
    cfg: AfeConfig,
    table: CoefficientTable,
    mu: MuExponent = MuExponent(),
) -> AfeBreakdown:
    """Z(s) = X(s) Z(1-s) with the sharp equation applied at 1-s, x and y swapped.

    The breakdown is reported in the roles of s: ``sum_x`` is again the
    n <= x sum with n^-s, and so on.
    """
    s = complex(s)
    if not 0.0 <= s.real <= 0.5:
        raise EvaluationRangeError(f"reflection needs 0 <= sigma <= 1/2, got {s.real}")
    if abs(s.imag) < 3.0:
        raise EvaluationRangeError(f"approximate functional equation needs |t| >= 3, got {s.imag}")
    cfg.check_product(s.imag, table.weight)
    swapped = replace(cfg, x=cfg.y, y=cfg.x)
    inner = _afe_terms(1.0 - s, swapped, table, mu)
    xs = cmath.exp(log_x_factor(s, table.weight))
    return AfeBreakdown.from_terms(
        sum_x=xs * inner.sum_y,
        sum_y=xs * inner.sum_x,
        corr_x=xs * inner.corr_y,
        corr_y=xs * inner.corr_x,
        error_budget=abs(xs) * inner.error_budget,
    )


# ---------------------------------------------------------------------------
# Smoothed approximate functional equation


def z_afe_smoothed(
    t: float,
    table: CoefficientTable,
    x: float | None = None,
    y: float | None = None,
    weight: SmoothWeight = SmoothWeight(),
) -> complex:
    """sum rho(n/x) c_n n^-s + X(s) sum rho(n/y) c_n n^(s-1) at s = 1/2 + it.

    With x, y omitted the symmetric split x = y = sqrt(tau(t)) is used.
    """
    if t < 3.0:
        raise EvaluationRangeError(f"smoothed equation needs t >= 3, got {t}")
    kappa = table.weight
    tau = tau_of_t(t, kappa)
    if x is None and y is None:
        x = y = math.sqrt(tau)
    elif x is None:
        x = tau / y
    elif y is None:
        y = tau / x
    if abs(x * y - tau) > XY_TOLERANCE * tau:
        raise ValueError(f"x*y = {x * y!r} differs from tau(t) = {tau!r}")
    s = complex(0.5, t)

    def weighted(cut):
        top = int(math.floor(weight.b * cut))
        if top > table.n_max:
            raise TableLengthError(f"need c_n up to n={top}, table has N={table.n_max}")
        if top < 1:
            return np.zeros(0)
        n = np.arange(1, top + 1, dtype=np.float64)
        return rho_weight(n / cut, weight) * table.c_float[1 : top + 1]

    first = dirichlet_sum(weighted(x), s)
    second = dirichlet_sum(weighted(y), 1.0 - s)
    return first + cmath.exp(log_x_factor(s, kappa)) * second


# ---------------------------------------------------------------------------
# Hardy-type function


def hardy_point(
    t: float,
    table: CoefficientTable,
    constant: float = 0.0,
    split_ratio: float = 1.0,
    extra_budget: float = 0.0,
    mu: MuExponent = MuExponent(),
) -> HardyPoint:
    """Z(1/2+it) X^(-1/2)(1/2+it) with its imaginary residue and budget.

    X^(-1/2) is exp(-log X / 2) with the continuous logarithm that vanishes
    at s = 1/2. Both correction constants equal ``constant``.
    """
    if t < 3.0:
        raise EvaluationRangeError(f"Hardy function needs t >= 3, got {t}")
    kappa = table.weight
    s = complex(0.5, t)
    cfg = AfeConfig.for_t(t, kappa, split_ratio, c1=constant, c2=constant, extra_budget=extra_budget)
    br = _afe_terms(s, cfg, table, mu)
    val = br.value * cmath.exp(-0.5 * log_x_factor(s, kappa))
    return HardyPoint(t=t, value=val.real, imag_residue=abs(val.imag), error_budget=br.error_budget)


def hardy_z(t: float, table: CoefficientTable, constant: float = 0.0, **kwargs) -> float:
    """Real value of the Hardy-type function at the symmetric split."""
    pt = hardy_point(t, table, constant, **kwargs)
    if pt.imag_residue > pt.error_budget:
        raise ConsistencyError(
            f"imaginary part {pt.imag_residue} exceeds budget {pt.error_budget} at t={t}"
        )
    return pt.value


def hardy_z_cos(t: float, table: CoefficientTable, offset: float | None = None) -> float:
    """2 sum_{n <= (t/2pi)^2} c_n n^(-1/2) cos(t log((t/2pi)^2/n) - 2t + offset).

    ``offset`` defaults to (kappa-1) pi / 2, the constant phase of
    X^(-1/2)(1/2+it) on the continuous branch. Phases are built in
    double-double arithmetic and reduced mod 2 pi before the cosine.
    """
    if t < 3.0:
        raise EvaluationRangeError(f"cosine sum needs t >= 3, got {t}")
    kappa = table.weight
    if offset is None:
        offset = (kappa - 1) * math.pi / 2
    m = (t / (2.0 * math.pi)) ** 2
    top = int(math.floor(m))
    if top > table.n_max:
        raise TableLengthError(f"need c_n up to n={top}, table has N={table.n_max}")
    if top < 1:
        return 0.0
    n = np.arange(1, top + 1, dtype=np.float64)
    # t log((t/2pi)^2 / n) = 2 t log(t / 2pi) - t log n
    lt_hi, lt_lo = log_dd(t / (2.0 * math.pi))
    a_hi, a_lo = two_prod(np.float64(2.0 * t), lt_hi)
    a_lo = a_lo + 2.0 * t * lt_lo
    ln_hi, ln_lo = log_dd(n)
    b_hi, b_lo = two_prod(np.float64(t), ln_hi)
    b_lo = b_lo + t * ln_lo
    hi, lo = two_sum(a_hi, -b_hi)
    lo = lo + (a_lo - b_lo)
    hi, lo2 = two_sum(hi, np.float64(-2.0 * t))
    lo = lo + lo2
    hi, lo3 = two_sum(hi, np.float64(offset))
    phase = reduce_dd(hi, lo + lo3)
    terms = table.c_float[1 : top + 1] / np.sqrt(n) * np.cos(phase)
    return 2.0 * math.fsum(terms)


# ---------------------------------------------------------------------------
# Calibration


def estimate_c_hat(table: CoefficientTable, n: int | None = None) -> float:
    """Mean of S(x)/x over the dyadic grid x = N/16, N/8, ..., N."""
    n = table.n_max if n is None else n
    grid = [max(1, n // 2**j) for j in range(4, -1, -1)]
    return math.fsum(table.c_prefix[x] / x for x in grid) / len(grid)


def delta_ratios(table: CoefficientTable, c_hat: float, n: int | None = None) -> np.ndarray:
    """sup-relevant |Delta|/x^(3/5) at each integer x, left limits included.

    Delta jumps at integers, so the supremum over real x <= N is attained
    either at an integer or just below one: S(x-1) - C x.
    """
    n = table.n_max if n is None else n
    x = np.arange(1, n + 1, dtype=np.float64)
    pre = table.c_prefix
    at = np.abs(pre[1 : n + 1] - c_hat * x)
    below = np.abs(pre[0:n] - c_hat * x)
    return np.maximum(at, below) / x**RANKIN_SELBERG_EXPONENT


def estimate_k_hat(table: CoefficientTable, c_hat: float, n: int | None = None) -> float:
    return float(delta_ratios(table, c_hat, n).max())


def fit_correction_constants(
    residual: Sequence[complex],
    u: Sequence[complex],
    v: Sequence[complex],
    tied: bool = True,
) -> tuple[float, float]:
    """Real least squares for r ~ C1 u + C2 v (C1 = C2 when ``tied``)."""
    r = np.asarray(residual, dtype=complex)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if tied:
        w = u + v
        design = np.concatenate([w.real, w.imag])[:, None]
    else:
        design = np.column_stack(
            [np.concatenate([u.real, u.imag]), np.concatenate([v.real, v.imag])]
        )
    rhs = np.concatenate([r.real, r.imag])
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    if tied:
        return float(coef[0]), float(coef[0])
    return float(coef[0]), float(coef[1])


def calibrate_constants(
    table: CoefficientTable,
    t_grid: Sequence[float] = (10.0, 15.0, 20.0, 25.0, 30.0),
    sigma: float = 0.9,
    tied: bool = True,
    evaluator=None,
) -> Calibration:
    """Estimate C, K and fit C1, C2 against the direct series.

    ``evaluator(s, c_hat, k_hat)`` returns the reference value; by default
    :func:`z_direct` on the whole table. If the fitted constants do not cut
    the rms residual at least in half, they fall back to 0 and the largest
    uncorrected residual is carried as budget inflation.
    """
    kappa = table.weight
    c_hat = estimate_c_hat(table)
    k_hat = estimate_k_hat(table, c_hat)
    if evaluator is None:
        def evaluator(s, c, k):
            return z_direct(s, table, c, k).value

    resid, us, vs = [], [], []
    for t in t_grid:
        s = complex(sigma, t)
        cfg = AfeConfig.for_t(t, kappa)
        base = _afe_terms(s, cfg, table, MuExponent())
        ref = evaluator(s, c_hat, k_hat)
        resid.append(ref - base.value)
        us.append(cmath.exp((1 - s) * math.log(cfg.x)) / (1 - s))
        vs.append(cmath.exp(log_x_factor(s, kappa) + s * math.log(cfg.y)) / s)

    c1, c2 = fit_correction_constants(resid, us, vs, tied)
    fitted = [r - c1 * u - c2 * v for r, u, v in zip(resid, us, vs)]
    rms0 = math.sqrt(sum(abs(r) ** 2 for r in resid) / len(resid))
    rms1 = math.sqrt(sum(abs(r) ** 2 for r in fitted) / len(fitted))
    cal = Calibration(
        c_hat=c_hat,
        k_hat=k_hat,
        c1=c1,
        c2=c2,
        sigma=sigma,
        t_grid=tuple(float(t) for t in t_grid),
        residuals=[abs(r) for r in fitted],
        residuals_uncorrected=[abs(r) for r in resid],
        tied=tied,
    )
    if not rms1 * 2.0 <= rms0:
        warnings.warn(
            f"correction fit reduced rms residual only from {rms0:.3g} to {rms1:.3g}; "
            "using C1 = C2 = 0 with inflated budget",
            CalibrationWarning,
            stacklevel=2,
        )
        cal.c1 = cal.c2 = 0.0
        cal.residuals = list(cal.residuals_uncorrected)
        cal.budget_inflation = max(cal.residuals_uncorrected)
        cal.fallback = True
    return cal


def differencing_sum(m: int, p: int) -> int:
    """sum_{nu=0}^m (-1)^nu C(m, nu) nu^p, in exact integers."""
    return sum((-1) ** nu * math.comb(m, nu) * nu**p for nu in range(m + 1))
