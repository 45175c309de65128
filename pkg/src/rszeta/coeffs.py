"""Coefficient tables for the Rankin-Selberg zeta-function.

The table holds the Fourier coefficients a(n) of a normalized Hecke
eigenform of weight kappa, the convolution coefficients

    c_n = n^(1-kappa) * sum_{m^2 | n} m^(2(kappa-1)) |a(n/m^2)|^2

and their Moebius transform b_n = sum_{d | n} mu(d) c_{n/d}, so that
Z(s) = zeta(s) B(s) with B(s) = sum b_n n^-s.

c_n and b_n are kept exactly as integer numerators over the common
denominator n^(kappa-1); floats are produced only on request.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

try:
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _mpz = int

logger = logging.getLogger(__name__)

BUILTIN = "builtin-discriminant"
EXTERNAL = "external-file"
DISCRIMINANT_WEIGHT = 12
CHECKSUM_MODULUS = 2**61 - 1
FORMAT_MAGIC = "RSZETA-COEFS"
FORMAT_VERSION = "v1"


class CoefficientError(ValueError):
    """Base class for invalid coefficient input."""


class NormalizationError(CoefficientError):
    pass


class ContiguityError(CoefficientError):
    pass


class CoefficientParseError(CoefficientError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


class TableFormatError(CoefficientError):
    """The cache file is empty, malformed or of the wrong version."""


class VersionMismatchError(TableFormatError):
    pass


class ChecksumError(TableFormatError):
    pass


class DeligneBoundWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class EigenformSpec:
    """Which eigenform a table describes and how long it is."""

    weight: int
    n_max: int
    source: str = field(default=BUILTIN, compare=False)

    def __post_init__(self):
        if self.weight < DISCRIMINANT_WEIGHT or self.weight % 2:
            raise CoefficientError(f"weight must be even and >= 12, got {self.weight}")
        if self.n_max < 1:
            raise CoefficientError(f"n_max must be positive, got {self.n_max}")
        if self.source not in (BUILTIN, EXTERNAL):
            raise CoefficientError(f"unknown coefficient source {self.source!r}")
        if self.source == BUILTIN and self.weight != DISCRIMINANT_WEIGHT:
            raise CoefficientError("the builtin discriminant form has weight 12")


@dataclass(frozen=True)
class CoefficientTable:
    """Immutable table of a(n), c_n and b_n for 1 <= n <= N.

    All sequences are 1-indexed: element 0 is a zero placeholder. ``c_num[n]``
    and ``b_num[n]`` are integers; the coefficients are ``c_num[n] / n^(kappa-1)``
    and ``b_num[n] / n^(kappa-1)``.
    """

    spec: EigenformSpec
    a: tuple
    c_num: tuple
    b_num: tuple

    @property
    def weight(self) -> int:
        return self.spec.weight

    @property
    def n_max(self) -> int:
        return self.spec.n_max

    def __len__(self) -> int:
        return self.spec.n_max

    def denominator(self, n: int) -> int:
        return n ** (self.weight - 1)

    def c(self, n: int) -> Fraction:
        return Fraction(self.c_num[n], self.denominator(n))

    def b(self, n: int) -> Fraction:
        return Fraction(self.b_num[n], self.denominator(n))

    @cached_property
    def c_float(self) -> np.ndarray:
        """c_n as float64, index 0 holds 0.0."""
        return _ratio_array(self.c_num, self.weight)

    @cached_property
    def b_float(self) -> np.ndarray:
        return _ratio_array(self.b_num, self.weight)

    @cached_property
    def c_prefix(self) -> np.ndarray:
        """Running sums S(x) = sum_{n<=x} c_n with S(0) = 0, compensated."""
        return _prefix_sums(self.c_num, self.weight)

    @cached_property
    def checksum(self) -> int:
        return coefficient_checksum(self.a)


def _ratio_array(numerators: Sequence[int], weight: int) -> np.ndarray:
    out = np.zeros(len(numerators), dtype=np.float64)
    e = weight - 1
    for n in range(1, len(numerators)):
        out[n] = numerators[n] / n**e
    return out


def _prefix_sums(c_num: Sequence[int], weight: int) -> np.ndarray:
    # An exact rational running total would need the denominator
    # lcm(1..N)^(kappa-1); compensated float summation is plenty here.
    vals = _ratio_array(c_num, weight)
    out = np.empty_like(vals)
    acc = 0.0
    comp = 0.0
    for n, v in enumerate(vals):
        # Neumaier summation; c_n >= 0 so the running total is monotone.
        t = acc + v
        if abs(acc) >= abs(v):
            comp += (acc - t) + v
        else:
            comp += (v - t) + acc
        acc = t
        out[n] = acc + comp
    return out


def coefficient_checksum(a: Sequence[int]) -> int:
    """Sum of a(n), n >= 1, reduced mod 2^61 - 1."""
    return sum(a[1:]) % CHECKSUM_MODULUS


# ---------------------------------------------------------------------------
# Sieves


def prime_sieve(n: int) -> np.ndarray:
    """Boolean array ``is_prime`` of length n + 1."""
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[: min(2, n + 1)] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


def mobius_sieve(n: int) -> np.ndarray:
    """Moebius function mu(0..n) as int8, mu(0) = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    for p in np.flatnonzero(prime_sieve(n)):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def divisor_count_sieve(n: int) -> np.ndarray:
    """Number of divisors d(0..n) as int64, d(0) = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    d = np.zeros(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        d[k::k] += 1
    return d


# ---------------------------------------------------------------------------
# Ramanujan tau


def _pentagonal_series(n: int) -> list[int]:
    """Coefficients of prod_{k>=1} (1 - x^k) through x^n."""
    e = [0] * (n + 1)
    e[0] = 1
    j = 1
    while j * (3 * j - 1) // 2 <= n:
        sign = -1 if j % 2 else 1
        e[j * (3 * j - 1) // 2] += sign
        g = j * (3 * j + 1) // 2
        if g <= n:
            e[g] += sign
        j += 1
    return e


def _slot_bytes(a: Sequence[int], b: Sequence[int]) -> int:
    # |sum_j a_j b_{i-j}| <= min(len) * max|a| * max|b| < 2^(width-1)
    bits = (
        max(abs(v) for v in a).bit_length()
        + max(abs(v) for v in b).bit_length()
        + min(len(a), len(b)).bit_length()
        + 2
    )
    return (bits + 7) // 8


def _pack(coeffs: Sequence[int], nbytes: int, bias: int, bias_total: int) -> int:
    buf = b"".join((c + bias).to_bytes(nbytes, "little") for c in coeffs)
    return int.from_bytes(buf, "little") - bias_total


def poly_mul_trunc(a: Sequence[int], b: Sequence[int], length: int) -> list[int]:
    """Exact product of integer polynomials, truncated to ``length`` terms.

    Uses Kronecker substitution: both operands are packed into one big
    integer with fixed-width signed slots, multiplied once, and unpacked.
    The slot width is derived from a rigorous bound on the product
    coefficients, so no coefficient can wrap into its neighbour.
    """
    a = list(a[:length])
    b = list(b[:length])
    nbytes = _slot_bytes(a, b)
    width = 8 * nbytes
    bias = 1 << (width - 1)
    slot = b"\x00" * (nbytes - 1) + b"\x80"

    def bias_total(k):
        return int.from_bytes(slot * k, "little")

    pa = _pack(a, nbytes, bias, bias_total(len(a)))
    pb = _pack(b, nbytes, bias, bias_total(len(b)))
    prod = _mpz(pa) * _mpz(pb)
    low = int((prod + bias_total(length)) % (_mpz(1) << (width * length)))
    raw = low.to_bytes(nbytes * length, "little")
    return [
        int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - bias
        for i in range(length)
    ]


def build_tau(n: int) -> list[int]:
    """Ramanujan tau(1..n), returned 1-indexed with a 0 placeholder.

    x * prod (1 - x^k)^24 is formed from the pentagonal-number series by
    squaring up to the 16th power and one further product with the 8th
    power. Arithmetic is exact Python/GMP integers throughout; the cost is
    dominated by five big-integer products of about N * 170 bits each.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    e1 = _pentagonal_series(n - 1)
    e2 = poly_mul_trunc(e1, e1, n)
    e4 = poly_mul_trunc(e2, e2, n)
    e8 = poly_mul_trunc(e4, e4, n)
    e16 = poly_mul_trunc(e8, e8, n)
    e24 = poly_mul_trunc(e16, e8, n)
    return [0] + e24


# ---------------------------------------------------------------------------
# c_n and b_n


def _check_length(seq: Sequence, n: int, name: str):
    if len(seq) < n + 1:
        raise CoefficientError(f"{name} has {len(seq) - 1} terms, need {n}")


def build_c(a: Sequence[int], weight: int, n: int) -> list[int]:
    """Numerators of c_1..c_n over n^(weight-1); 1-indexed.

    Args:
        a: 1-indexed coefficients with a[1] == 1.
        weight: the weight kappa.
        n: number of terms.
    """
    if weight < 2:
        raise CoefficientError(f"invalid weight {weight}")
    _check_length(a, n, "a")
    if a[1] != 1:
        raise NormalizationError(f"a(1) must be 1, got {a[1]}")
    e = 2 * (weight - 1)
    a2 = np.empty(n + 1, dtype=object)
    a2[:] = [v * v for v in a[: n + 1]]
    a2[0] = 0
    c = np.zeros(n + 1, dtype=object)
    for m in range(1, math.isqrt(n) + 1):
        sq = m * m
        c[sq::sq] += m**e * a2[1 : n // sq + 1]
    return c.tolist()


def build_b(c_num: Sequence[int], weight: int, n: int) -> list[int]:
    """Numerators of b_1..b_n over n^(weight-1); 1-indexed.

    b_n = sum_{d|n} mu(d) c_{n/d}; over the common denominator n^(kappa-1)
    the term for d picks up the factor d^(kappa-1).
    """
    _check_length(c_num, n, "c")
    mu = mobius_sieve(n)
    c = np.empty(n + 1, dtype=object)
    c[:] = list(c_num[: n + 1])
    b = np.zeros(n + 1, dtype=object)
    e = weight - 1
    for d in range(1, n + 1):
        m = int(mu[d])
        if m:
            b[d::d] += (m * d**e) * c[1 : n // d + 1]
    return b.tolist()


def _table_from_a(a: Sequence[int], weight: int, source: str) -> CoefficientTable:
    n = len(a) - 1
    spec = EigenformSpec(weight=weight, n_max=n, source=source)
    c = build_c(a, weight, n)
    b = build_b(c, weight, n)
    return CoefficientTable(spec=spec, a=tuple(a), c_num=tuple(c), b_num=tuple(b))


def build_table(n_max: int, weight: int = DISCRIMINANT_WEIGHT) -> CoefficientTable:
    """Table for the discriminant form Delta (a = tau, weight 12)."""
    EigenformSpec(weight=weight, n_max=n_max, source=BUILTIN)
    logger.info("building tau table to N=%d", n_max)
    return _table_from_a(build_tau(n_max), weight, BUILTIN)


def deligne_violations(a: Sequence[int], weight: int) -> list[int]:
    """Indices n with |a(n)| > n^((kappa-1)/2) d(n), checked in integers."""
    n = len(a) - 1
    d = divisor_count_sieve(n)
    e = weight - 1
    return [k for k in range(1, n + 1) if a[k] * a[k] > k**e * int(d[k]) ** 2]


# ---------------------------------------------------------------------------
# External coefficients and the cache format


def ingest_coefficients(path, weight: int) -> CoefficientTable:
    """Read ``n a(n)`` lines and build a validated table.

    Blank lines and lines starting with ``#`` are ignored. Indices must run
    1, 2, 3, ... without gaps. Deligne-bound violations only warn: the file
    is trusted to describe a Hecke eigenform.
    """
    path = Path(path)
    a = [0]
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise CoefficientParseError(path, lineno, f"expected 'n a(n)', got {text!r}")
            try:
                idx, val = int(parts[0]), int(parts[1])
            except ValueError:
                raise CoefficientParseError(path, lineno, f"non-integer field in {text!r}") from None
            if idx != len(a):
                raise ContiguityError(f"{path}:{lineno}: expected n={len(a)}, got n={idx}")
            a.append(val)
    if len(a) == 1:
        raise CoefficientParseError(path, 0, "no coefficients found")
    if a[1] != 1:
        raise NormalizationError(f"{path}: a(1) must be 1, got {a[1]}")
    bad = deligne_violations(a, weight)
    if bad:
        warnings.warn(
            f"{path}: {len(bad)} coefficients exceed the Deligne bound (first n={bad[0]})",
            DeligneBoundWarning,
            stacklevel=2,
        )
    return _table_from_a(a, weight, EXTERNAL)


def export_coefficients(table: CoefficientTable, path) -> None:
    """Write ``n a(n)`` lines readable by :func:`ingest_coefficients`."""
    with Path(path).open("w") as fh:
        for n in range(1, table.n_max + 1):
            fh.write(f"{n} {table.a[n]}\n")


def _header(table: CoefficientTable) -> str:
    return f"{FORMAT_MAGIC} {FORMAT_VERSION} kappa={table.weight} N={table.n_max}"


def _rows(table: CoefficientTable, sep: str):
    for n in range(1, table.n_max + 1):
        den = table.denominator(n)
        yield f"{n}{sep}{table.a[n]}{sep}{table.c_num[n]}/{den}{sep}{table.b_num[n]}/{den}\n"


def save_table(table: CoefficientTable, path) -> None:
    with Path(path).open("w") as fh:
        fh.write(_header(table) + "\n")
        fh.writelines(_rows(table, " "))
        fh.write(f"CHECKSUM {table.checksum}\n")


def export_csv(table: CoefficientTable, path) -> None:
    with Path(path).open("w") as fh:
        fh.write(f"# {_header(table)}\n")
        fh.write("n,a_n,c_n,b_n\n")
        fh.writelines(_rows(table, ","))


def _numerator(field_text: str, den: int, what: str) -> int:
    num_s, _, den_s = field_text.partition("/")
    num, d = int(num_s), int(den_s)
    if d <= 0 or den % d:
        raise TableFormatError(f"{what}: denominator {d} does not divide {den}")
    return num * (den // d)


def load_table(path) -> CoefficientTable:
    """Read a table written by :func:`save_table`."""
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TableFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != FORMAT_MAGIC:
        raise TableFormatError(f"{path}: not a coefficient table")
    if head[1] != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: version {head[1]}, expected {FORMAT_VERSION}")
    try:
        weight = int(head[2].removeprefix("kappa="))
        n_max = int(head[3].removeprefix("N="))
    except ValueError:
        raise TableFormatError(f"{path}: bad header {lines[0]!r}") from None

    if not lines[-1].startswith("CHECKSUM ") or len(lines) != n_max + 2:
        raise ChecksumError(f"{path}: truncated table (missing rows or checksum)")
    expected = int(lines[-1].split()[1])

    a, c, b = [0], [0], [0]
    for lineno, line in enumerate(lines[1:-1], 2):
        parts = line.split()
        try:
            if len(parts) != 4 or int(parts[0]) != len(a):
                raise ValueError
            n = len(a)
            den = n ** (weight - 1)
            a.append(int(parts[1]))
            c.append(_numerator(parts[2], den, f"{path}:{lineno}"))
            b.append(_numerator(parts[3], den, f"{path}:{lineno}"))
        except ValueError:
            raise TableFormatError(f"{path}:{lineno}: malformed row {line!r}") from None

    if coefficient_checksum(a) != expected:
        raise ChecksumError(f"{path}: checksum mismatch")
    source = BUILTIN if weight == DISCRIMINANT_WEIGHT else EXTERNAL
    spec = EigenformSpec(weight=weight, n_max=n_max, source=source)
    return CoefficientTable(spec=spec, a=tuple(a), c_num=tuple(c), b_num=tuple(b))


# ---------------------------------------------------------------------------
# Diagnostics


def growth_diagnostic(table: CoefficientTable, start: int = 10_000, exponent: float = 0.1):
    """Rows (N, max_{n<=N} c_n / n^exponent) for N doubling from ``start``."""
    cf = table.c_float
    n = np.arange(len(cf), dtype=np.float64)
    scaled = np.zeros_like(cf)
    scaled[1:] = cf[1:] / n[1:] ** exponent
    running = np.maximum.accumulate(scaled)
    rows = []
    size = start
    while size <= table.n_max:
        rows.append((size, float(running[size])))
        size *= 2
    return rows


def b_mean_square(table: CoefficientTable, n: int | None = None) -> float:
    """sum_{k<=n} b_k^2 / n."""
    n = table.n_max if n is None else n
    return math.fsum(table.b_float[1 : n + 1] ** 2) / n
