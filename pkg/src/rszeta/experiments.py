"""Desk-scale numerical studies: the Rankin-Selberg error term Delta(x),
the first-moment integral of |Z(1/2+it)|, and sign-change scans of the
Hardy-type function.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .coeffs import CoefficientTable
from .evaluate import (
    RANKIN_SELBERG_EXPONENT,
    TableLengthError,
    delta_ratios,
    hardy_point,
)

MAX_QUADRATURE_STEP = 0.05
MAX_SCAN_STEP = 0.05
AFE_T_MIN = 3.0


class ZeroScanWarning(UserWarning):
    pass


def fmt(v: float) -> str:
    """15 significant digits, locale independent."""
    return format(float(v), ".15g")


@dataclass(frozen=True)
class ReportRow:
    abscissa: float
    measured: float
    envelope: float
    ratio: float


@dataclass
class ExperimentReport:
    name: str
    rows: list[ReportRow]
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = [r.abscissa for r in self.rows]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("report abscissae must be strictly increasing")

    @classmethod
    def from_columns(cls, name, abscissa, measured, envelope, **kwargs) -> "ExperimentReport":
        rows = [
            ReportRow(float(x), float(m), float(e), float(m) / float(e))
            for x, m, e in zip(abscissa, measured, envelope)
        ]
        return cls(name=name, rows=rows, **kwargs)

    def column(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.rows])

    def header(self) -> str:
        params = " ".join(f"{k}={v}" for k, v in self.params.items())
        return f"# rszeta-report {self.name} {params}".rstrip()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        for k, v in self.metadata.items():
            buf.write(f"# {k}={v}\n")
        buf.write("abscissa,measured,envelope,ratio\n")
        for r in self.rows:
            buf.write(f"{fmt(r.abscissa)},{fmt(r.measured)},{fmt(r.envelope)},{fmt(r.ratio)}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def _provenance(table: CoefficientTable) -> dict:
    return {"kappa": table.weight, "N": table.n_max, "checksum": table.checksum}


# ---------------------------------------------------------------------------
# Delta(x)


def default_x_grid(x_max: int, per_decade: int = 10) -> list[int]:
    """Integers 1..x_max, roughly log-spaced, always ending at x_max."""
    pts = np.unique(np.round(np.logspace(0, math.log10(x_max), per_decade * max(1, round(math.log10(x_max))) + 1)))
    grid = sorted({int(p) for p in pts if 1 <= p <= x_max} | {x_max})
    return grid


def running_max_profile(table: CoefficientTable, c_hat: float, x_max: int) -> dict:
    """Where sup |Delta(x)|/x^(3/5) over x <= x_max is attained, and how the
    running maximum evolves at the decades."""
    ratios = delta_ratios(table, c_hat, x_max)
    running = np.maximum.accumulate(ratios)
    decades = {}
    d = 1
    while d <= x_max:
        decades[d] = float(running[d - 1])
        d *= 10
    decades[x_max] = float(running[x_max - 1])
    tail_from = max(1, x_max // 10)
    return {
        "sup_ratio": float(running[-1]),
        "argsup": int(np.argmax(ratios)) + 1,
        "decade_running_max": decades,
        "final_decade_growth": float(running[-1] - running[tail_from - 1]),
        "sup_ratio_x_ge_10": float(ratios[9:].max()) if x_max >= 10 else float("nan"),
    }


def delta_scan(
    table: CoefficientTable,
    x_grid: Iterable[float],
    c_hat: float,
) -> ExperimentReport:
    """Rows (x, Delta(x), x^(3/5), Delta(x)/x^(3/5)) with Delta(x) = S(x) - C x."""
    grid = [float(x) for x in x_grid]
    if not grid:
        raise ValueError("empty x grid")
    top = max(grid)
    if math.floor(top) > table.n_max:
        raise TableLengthError(f"grid reaches x={top}, table has N={table.n_max}")
    if min(grid) < 1.0:
        raise ValueError("x grid must start at 1 or later")
    pre = table.c_prefix
    measured = [pre[int(math.floor(x))] - c_hat * x for x in grid]
    envelope = [x**RANKIN_SELBERG_EXPONENT for x in grid]
    meta = _provenance(table)
    profile = running_max_profile(table, c_hat, int(math.floor(top)))
    meta.update({k: v for k, v in profile.items() if k != "decade_running_max"})
    meta["decade_running_max"] = ";".join(
        f"{k}:{fmt(v)}" for k, v in profile["decade_running_max"].items()
    )
    return ExperimentReport.from_columns(
        "delta",
        grid,
        measured,
        envelope,
        params={"c_hat": fmt(c_hat), "x_max": fmt(top)},
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# First moment of |Z| on the critical line


def _abs_hardy(t: float, table: CoefficientTable, constant: float) -> float:
    return abs(hardy_point(max(t, AFE_T_MIN), table, constant).value)


def simpson(values: np.ndarray, step: float) -> float:
    """Composite Simpson rule on an odd number of equally spaced samples."""
    n = len(values) - 1
    if n < 2 or n % 2:
        raise ValueError("Simpson's rule needs an even number of intervals")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return step / 3.0 * math.fsum(w * values)


def first_moment(
    table: CoefficientTable,
    big_x: float,
    dt: float = MAX_QUADRATURE_STEP,
    constant: float = 0.0,
) -> float:
    """Integral over [0, X] of |Z(1/2+it)|, with the integrand on [0, 3)
    frozen at its t = 3 value."""
    n = int(math.ceil(big_x / dt))
    n += n % 2
    ts = np.linspace(0.0, big_x, n + 1)
    frozen = _abs_hardy(AFE_T_MIN, table, constant)
    vals = np.array([frozen if t < AFE_T_MIN else _abs_hardy(t, table, constant) for t in ts])
    return simpson(vals, big_x / n)


def mean_value_scan(
    table: CoefficientTable,
    x_grid: Sequence[float] = (100.0, 200.0, 400.0),
    dt: float = MAX_QUADRATURE_STEP,
    t_cap: float = 500.0,
    constant: float = 0.0,
) -> ExperimentReport:
    """Rows (X, int_0^X |Z(1/2+it)| dt, X^(5/4), ratio)."""
    if dt > MAX_QUADRATURE_STEP:
        raise ValueError(f"quadrature step {dt} exceeds {MAX_QUADRATURE_STEP}")
    grid = sorted(float(x) for x in x_grid)
    if grid[-1] > t_cap:
        raise ValueError(f"X={grid[-1]} exceeds the t cap {t_cap}")
    if grid[0] <= AFE_T_MIN:
        raise ValueError(f"X must exceed {AFE_T_MIN}")
    measured = [first_moment(table, x, dt, constant) for x in grid]
    envelope = [x**1.25 for x in grid]
    meta = _provenance(table)
    meta["frozen_head"] = fmt(AFE_T_MIN * _abs_hardy(AFE_T_MIN, table, constant))
    return ExperimentReport.from_columns(
        "meanvalue",
        grid,
        measured,
        envelope,
        params={"dt": fmt(dt), "t_cap": fmt(t_cap), "constant": fmt(constant)},
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# Sign changes of the Hardy-type function


def zero_scan(
    table: CoefficientTable,
    t_min: float,
    t_max: float,
    step: float = MAX_SCAN_STEP,
    width: float = 1e-6,
    constant: float = 0.0,
) -> list[tuple[float, float]]:
    """Brackets [lo, hi] of width <= ``width`` around sign changes seen on the grid.

    Only sign changes between neighbouring grid points are reported; the
    list is never claimed to be exhaustive.
    """
    if not AFE_T_MIN <= t_min < t_max:
        raise ValueError(f"need 3 <= t_min < t_max, got [{t_min}, {t_max}]")
    if step > MAX_SCAN_STEP:
        warnings.warn(
            f"scan step {step} exceeds {MAX_SCAN_STEP}; close zero pairs may be missed",
            ZeroScanWarning,
            stacklevel=2,
        )

    def f(t):
        return hardy_point(t, table, constant).value

    n = max(1, int(math.ceil((t_max - t_min) / step)))
    ts = [min(t_min + k * step, t_max) for k in range(n + 1)]
    vals = [f(t) for t in ts]
    brackets = []
    for i in range(n):
        a, b = ts[i], ts[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            if not brackets or brackets[-1] != (a, a):
                brackets.append((a, a))
            continue
        if fa * fb > 0 or fb == 0.0:
            continue
        while b - a > width:
            m = 0.5 * (a + b)
            fm = f(m)
            if fm == 0.0:
                a = b = m
                break
            if fa * fm < 0:
                b = m
            else:
                a, fa = m, fm
        brackets.append((a, b))
    if vals[-1] == 0.0:
        brackets.append((ts[-1], ts[-1]))
    return brackets
