"""Certified evaluation of sum(d(n) * a_n / b**n).

Partial sums are exact; the remainder is bounded with ``d(n) <= n``, which
gives the closed form

    sum_{n > M} n * b**-n = b**-M * ((M + 1)(b - 1) + 1) / (b - 1)**2.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .arith import (
    UnfactoredError,
    divisor_count,
    divisor_counts_window,
    divisor_sieve,
    factorize,
)
from .digits import DigitString, ScaledInteger, certified_common_prefix

DEFAULT_MAX_SCALE = 1 << 16
WINDOW_FACTOR_BOUND = 10**5
_SEGMENT_SIEVE_LIMIT = 10**12


@dataclass(frozen=True)
class SeriesSpec:
    """Base plus coefficient rule; ``kind`` is constant/alternating/periodic/explicit."""

    base: int
    kind: str
    pattern: tuple[int, ...] = ()

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"invalid base {self.base}")
        if self.kind not in ("constant", "alternating", "periodic", "explicit"):
            raise ValueError(f"unknown rule {self.kind!r}")
        object.__setattr__(self, "pattern", tuple(int(a) for a in self.pattern))
        if self.kind in ("constant", "periodic") and not self.pattern:
            raise ValueError(f"{self.kind} rule needs at least one coefficient")

    @classmethod
    def constant(cls, base, a=1):
        return cls(base, "constant", (a,))

    @classmethod
    def alternating(cls, base):
        return cls(base, "alternating")

    @classmethod
    def periodic(cls, base, pattern):
        return cls(base, "periodic", tuple(pattern))

    @classmethod
    def explicit(cls, base, coefficients):
        """Finite list ``a_1..a_L``; every later coefficient is 0."""
        return cls(base, "explicit", tuple(coefficients))

    @classmethod
    def parse(cls, base: int, text: str) -> "SeriesSpec":
        """Parse ``constant:a``, ``alternating``, ``periodic:a,b,..`` or ``explicit:a,b,..``."""
        kind, _, rest = text.partition(":")
        vals = tuple(int(t) for t in rest.split(",") if t.strip()) if rest else ()
        if kind == "alternating":
            return cls.alternating(base)
        return cls(base, kind, vals)

    def describe(self) -> str:
        if self.kind == "alternating":
            return "alternating"
        return f"{self.kind}:{','.join(map(str, self.pattern))}"

    @property
    def alphabet(self) -> frozenset[int]:
        if self.kind == "alternating":
            return frozenset((-1, 1))
        if self.kind == "explicit":
            return frozenset(self.pattern) | {0}
        return frozenset(self.pattern)

    @property
    def max_abs(self) -> int:
        return max(abs(a) for a in self.alphabet)

    @property
    def nonzero_alphabet(self) -> bool:
        """True when 0 is not a possible coefficient (every prime slot then yields a non-zero digit)."""
        return 0 not in self.alphabet

    def coefficient(self, n: int) -> int:
        if self.kind == "constant":
            return self.pattern[0]
        if self.kind == "alternating":
            return -1 if n % 2 else 1
        if self.kind == "periodic":
            return self.pattern[(n - 1) % len(self.pattern)]
        return self.pattern[n - 1] if n <= len(self.pattern) else 0

    def coefficients(self, lo: int, hi: int) -> np.ndarray:
        """``a_n`` for ``lo <= n <= hi`` as an int64 array."""
        n = np.arange(lo, hi + 1, dtype=np.int64)
        if self.kind == "constant":
            return np.full(n.shape, self.pattern[0], dtype=np.int64)
        if self.kind == "alternating":
            return np.where(n % 2 == 1, -1, 1).astype(np.int64)
        pat = np.asarray(self.pattern, dtype=np.int64)
        if self.kind == "periodic":
            return pat[(n - 1) % len(pat)]
        out = np.zeros(n.shape, dtype=np.int64)
        inside = n <= len(pat)
        out[inside] = pat[n[inside] - 1]
        return out

    def max_abs_after(self, M: int) -> int:
        """Bound on ``|a_n|`` for every ``n > M``."""
        if self.kind == "explicit":
            rest = self.pattern[M:]
            return max((abs(a) for a in rest), default=0)
        return self.max_abs

    def tail_sign(self, M: int) -> int:
        """+1 / -1 if every ``a_n`` with ``n > M`` is >= 0 / <= 0, else 0."""
        if self.kind == "alternating":
            return 0
        vals = self.pattern[M:] if self.kind == "explicit" else self.pattern
        if all(a >= 0 for a in vals):
            return 1
        if all(a <= 0 for a in vals):
            return -1
        return 0


def tail_upper_bound(b: int, M: int, max_abs: int) -> Fraction:
    """Upper bound on ``|sum_{n > M} d(n) a_n / b**n|`` when ``|a_n| <= max_abs``."""
    if b < 2 or M < 0:
        raise ValueError("need b >= 2 and M >= 0")
    return Fraction(max_abs * ((M + 1) * (b - 1) + 1), b**M * (b - 1) ** 2)


def partial_sum(spec: SeriesSpec, M: int) -> ScaledInteger:
    """Exact ``sum_{n <= M} d(n) a_n / b**n``."""
    if M == 0:
        return ScaledInteger(spec.base, 0, 0)
    d = divisor_sieve(M)
    c = d.astype(np.int64) * spec.coefficients(1, M)
    acc, b = 0, spec.base
    for v in c.tolist():
        acc = acc * b + v
    return ScaledInteger(b, acc, M)


def _round_out(q: Fraction, base: int, scale: int, up: bool) -> ScaledInteger:
    num = q.numerator * base**scale
    v = -((-num) // q.denominator) if up else num // q.denominator
    return ScaledInteger(base, v, scale)


@dataclass(frozen=True)
class CertifiedPrefix:
    spec: SeriesSpec
    truncation: int
    partial: ScaledInteger
    tail_bound: Fraction
    digits: DigitString
    certified_length: int
    exact: bool = False
    complete: bool = True  # False when the scale budget ran out before the target
    integer_certified: bool = True

    def digit_array(self, length: int | None = None) -> np.ndarray:
        """Certified digits as an array; exact prefixes are zero-padded to ``length``."""
        if length is None:
            length = self.certified_length
        if length > self.certified_length and not self.exact:
            raise ValueError(f"only {self.certified_length} digits are certified")
        return np.asarray(self.digits.padded(length), dtype=np.int64)


def certified_prefix_at(spec: SeriesSpec, M: int) -> CertifiedPrefix:
    """Certify as many digits as the truncation point ``M`` allows."""
    b = spec.base
    partial = partial_sum(spec, M)
    max_tail = spec.max_abs_after(M)
    T = tail_upper_bound(b, M, max_tail) if max_tail else Fraction(0)
    if T == 0:
        cp = certified_common_prefix(abs(partial), abs(partial))
        ds = cp.digits
        if partial.value < 0:
            ds = DigitString(b, -1, ds.integer_part, ds.digits)
        return CertifiedPrefix(spec, M, partial, T, ds, cp.length, exact=True)

    sign = spec.tail_sign(M)
    guard = M + 4 + (b - 1).bit_length() * 2
    p = partial.to_fraction()
    lo_q = p - T if sign <= 0 else p
    hi_q = p + T if sign >= 0 else p
    lo = _round_out(lo_q, b, guard, up=False)
    hi = _round_out(hi_q, b, guard, up=True)
    if lo.value >= 0:
        cp, sign = certified_common_prefix(lo, hi), 1
    elif hi.value <= 0:
        cp, sign = certified_common_prefix(-hi, -lo), -1
    else:
        cp, sign = None, 1  # interval straddles zero
    if cp is None or not cp.integer_certified:
        return CertifiedPrefix(spec, M, partial, T, DigitString(b, 1, 0, ()), 0,
                               integer_certified=False)
    ds = cp.digits
    if sign < 0 and (ds.integer_part or any(ds.digits)):
        ds = DigitString(b, -1, ds.integer_part, ds.digits)
    return CertifiedPrefix(spec, M, partial, T, ds, cp.length)


def certified_prefix(
    spec: SeriesSpec,
    target_digits: int,
    *,
    max_scale: int = DEFAULT_MAX_SCALE,
    truncation: int | None = None,
) -> CertifiedPrefix:
    """Grow the truncation point (doubling) until ``target_digits`` are certified.

    With ``truncation`` given, evaluate exactly there once and report what it
    certifies.  Running out of ``max_scale`` is not an error: the returned
    prefix has ``complete=False``.
    """
    if target_digits < 1:
        raise ValueError("target_digits must be >= 1")
    if truncation is not None:
        res = certified_prefix_at(spec, truncation)
        return _with_complete(res, target_digits)
    if spec.kind == "explicit" and len(spec.pattern) <= max_scale:
        return _with_complete(certified_prefix_at(spec, len(spec.pattern)), target_digits)
    M = max(32, target_digits + 16 + 2 * target_digits.bit_length())
    while True:
        M = min(M, max_scale)
        res = certified_prefix_at(spec, M)
        if res.exact or res.certified_length >= target_digits or M >= max_scale:
            return _with_complete(res, target_digits)
        M *= 2


def _with_complete(res: CertifiedPrefix, target: int) -> CertifiedPrefix:
    ok = res.exact or res.certified_length >= target
    if ok == res.complete:
        return res
    return dataclasses.replace(res, complete=ok)


# -- tail comparisons -------------------------------------------------------

class Verdict(enum.Enum):
    ABOVE = "above"
    BELOW = "below"
    UNRESOLVED = "unresolved"


class TailComparison(NamedTuple):
    verdict: Verdict
    window: int  # number of explicitly summed tail terms
    lower: Fraction  # enclosure of b**cutoff * tail
    upper: Fraction


def _divisor_bounds(lo: int, hi: int) -> tuple[list[int], list[int]]:
    """Lower/upper bounds on ``d(n)`` for ``lo <= n <= hi`` (equal when factored)."""
    if hi <= _SEGMENT_SIEVE_LIMIT:
        d = divisor_counts_window(lo, hi).tolist()
        return d, d
    low, high = [], []
    for n in range(lo, hi + 1):
        try:
            v = divisor_count(n, WINDOW_FACTOR_BOUND)
            low.append(v)
            high.append(v)
        except UnfactoredError as exc:
            # cofactor has no prime factor <= bound, so it has few prime factors
            known = factorize(n // exc.cofactor).divisor_count() if n != exc.cofactor else 1
            # every prime factor of the cofactor exceeds the bound
            most, f = 0, WINDOW_FACTOR_BOUND + 1
            while f <= exc.cofactor:
                most += 1
                f *= WINDOW_FACTOR_BOUND + 1
            low.append(known * 2)
            high.append(known * 2**most)
    return low, high


def tail_enclosure(spec: SeriesSpec, cutoff: int, window: int) -> tuple[Fraction, Fraction]:
    """Bounds on ``b**cutoff * sum_{n > cutoff} |d(n) a_n| / b**n``.

    The first ``window`` terms are summed exactly; the rest use ``d(n) <= n``.
    """
    b = spec.base
    C, W = cutoff, window
    if W > 0:
        dlo, dhi = _divisor_bounds(C + 1, C + W)
        a = np.abs(spec.coefficients(C + 1, C + W)).tolist()
        s_lo = s_hi = 0
        for x, y, c in zip(dlo, dhi, a):
            s_lo = s_lo * b + x * c
            s_hi = s_hi * b + y * c
        lower = Fraction(s_lo, b**W)
        upper = Fraction(s_hi, b**W)
    else:
        lower = upper = Fraction(0)
    rest = spec.max_abs_after(C + W)
    if rest:
        upper += Fraction(rest * ((C + W + 1) * (b - 1) + 1), b**W * (b - 1) ** 2)
    return lower, upper


def _scale_threshold(threshold, base: int, shift: int) -> Fraction:
    """``threshold * base**shift`` without building huge fractions."""
    if isinstance(threshold, ScaledInteger):
        if threshold.base != base:
            raise ValueError("threshold base differs from series base")
        k = shift - threshold.scale
        return Fraction(threshold.value * base**k) if k >= 0 else Fraction(threshold.value, base**-k)
    q = Fraction(threshold)
    return Fraction(q.numerator * base**shift, q.denominator)


def tail_compare(
    spec: SeriesSpec,
    cutoff: int,
    threshold,
    *,
    budget: int = 4096,
    start_window: int = 16,
    power: int = 1,
) -> TailComparison:
    """Decide whether ``sum_{n > cutoff} |d(n) a_n / b**n|`` is above or below ``threshold``.

    ``threshold`` is a positive :class:`~fractions.Fraction` or
    :class:`ScaledInteger`.  With ``power=2`` the squared tail is compared
    instead, which lets half-integer powers of ``b`` be tested exactly.
    ``budget`` caps the number of explicitly summed terms.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    theta = _scale_threshold(threshold, spec.base, power * cutoff)
    if theta <= 0:
        raise ValueError("threshold must be positive")

    lower, upper = tail_enclosure(spec, cutoff, 0)
    if upper**power < theta:
        return TailComparison(Verdict.BELOW, 0, lower, upper)
    W = max(1, min(start_window, budget))
    while True:
        lower, upper = tail_enclosure(spec, cutoff, W)
        if upper**power < theta:
            return TailComparison(Verdict.BELOW, W, lower, upper)
        if lower**power > theta:
            return TailComparison(Verdict.ABOVE, W, lower, upper)
        if W >= budget:
            return TailComparison(Verdict.UNRESOLVED, W, lower, upper)
        W = min(2 * W, budget)


def margin_threshold(base: int, max_abs: int, offset: int, k: int) -> tuple[ScaledInteger, int]:
    """``max_abs / base**(offset + k/2)`` as ``(threshold, power)``.

    For odd ``k`` the square is returned with ``power=2``.
    """
    if k % 2 == 0:
        return ScaledInteger(base, max_abs, offset + k // 2), 1
    return ScaledInteger(base, max_abs * max_abs, 2 * offset + k), 2


# -- tail census ------------------------------------------------------------

@dataclass(frozen=True)
class CensusRow:
    m: int
    cutoff: int
    threshold: ScaledInteger
    power: int
    verdict: Verdict
    window_used: int


@dataclass
class CensusReport:
    base: int
    k: int
    A: int
    r: int
    m_limit: int
    rows: list[CensusRow] = field(default_factory=list)
    coefficient_max: int = 1
    lemma_thresholds: list[ScaledInteger] = field(default_factory=list)

    @property
    def exceedances(self) -> int:
        return sum(row.verdict is Verdict.ABOVE for row in self.rows)

    @property
    def unresolved(self) -> int:
        return sum(row.verdict is Verdict.UNRESOLVED for row in self.rows)

    def shape_value(self) -> str:
        """The counting bound with its unknown constant left symbolic."""
        N = self.m_limit * self.A
        if N < 2:
            return "c*0"
        v = 10 * N * math.log(N) ** 2 / (self.A * 2 ** (self.k / 4))
        return f"c*{v!r}"

    def to_csv(self) -> str:
        out = ["m,cutoff,threshold_num,threshold_den,verdict,window_used"]
        for row in self.rows:
            num, den = row.threshold.value, row.threshold.base**row.threshold.scale
            out.append(f"{row.m},{row.cutoff},{_dec(num)},{_dec(den)},{row.verdict.value},{row.window_used}")
        return "\n".join(out) + "\n"


def _dec(n: int) -> str:
    import gmpy2

    return gmpy2.mpz(n).digits(10)


def _census_row(args) -> CensusRow:
    spec, m, r, A, k, budget = args
    C = r + k + m * A
    theta, power = margin_threshold(spec.base, spec.max_abs, r + m * A, k)
    res = tail_compare(spec, C, theta, budget=budget, power=power)
    return CensusRow(m, C, theta, power, res.verdict, res.window)


def lemma1_census(plan, spec: SeriesSpec, m_limit: int, *, budget: int = 4096, workers: int = 1) -> CensusReport:
    """Classify each ``m < m_limit`` by whether the tail past ``r + k + mA`` is large.

    The tail is ``sum |d(n) a_n| / b**n`` and "large" means above
    ``max|a| / b**(r + k/2 + mA)``.  Unresolved rows are kept but never counted.
    """
    if spec.base != plan.base:
        raise ValueError("series base differs from plan base")
    jobs = [(spec, m, plan.r, plan.A, plan.k, budget) for m in range(m_limit)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_census_row, jobs))
    else:
        rows = [_census_row(j) for j in jobs]
    unit = [margin_threshold(spec.base, 1, plan.r + m * plan.A, plan.k)[0] for m in range(m_limit)]
    return CensusReport(spec.base, plan.k, plan.A, plan.r, m_limit, rows, spec.max_abs, unit)


__all__ = [
    "SeriesSpec", "CertifiedPrefix", "Verdict", "TailComparison", "CensusRow",
    "CensusReport", "tail_upper_bound", "partial_sum", "certified_prefix",
    "certified_prefix_at", "tail_enclosure", "tail_compare", "margin_threshold",
    "lemma1_census",
]
