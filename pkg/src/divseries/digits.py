"""Exact base-b arithmetic on scaled integers and canonical digit extraction.

A :class:`ScaledInteger` stands for ``value / base**scale``.  Everything here
is integer arithmetic; no floating point is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import gmpy2


class BaseMismatchError(ValueError):
    pass


class EmptyIntervalError(ValueError):
    pass


def _check_base(base: int) -> None:
    if base < 2:
        raise ValueError(f"invalid base {base}: must be >= 2")


@dataclass(frozen=True)
class ScaledInteger:
    """The exact rational ``value / base**scale``, kept in canonical form."""

    base: int
    value: int
    scale: int = 0

    def __post_init__(self):
        _check_base(self.base)
        if self.scale < 0:
            raise ValueError("scale must be non-negative")
        value, scale = self.value, self.scale
        if value == 0:
            scale = 0
        else:
            while scale and value % self.base == 0:
                value //= self.base
                scale -= 1
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def from_fraction(cls, base: int, q: Fraction) -> "ScaledInteger":
        """Exact conversion; the denominator must divide a power of ``base``."""
        q = Fraction(q)
        den, scale = q.denominator, 0
        power = 1
        while power % den:
            power *= base
            scale += 1
            if scale > 4 * den.bit_length() + 4:
                raise ValueError(f"{q} has no terminating base-{base} expansion")
        return cls(base, q.numerator * (power // den), scale)

    def to_fraction(self) -> Fraction:
        return Fraction(self.value, self.base**self.scale)

    def rescale(self, scale: int) -> int:
        """Numerator of this value at a larger ``scale``."""
        if scale < self.scale:
            raise ValueError("cannot rescale to a smaller scale exactly")
        return self.value * self.base ** (scale - self.scale)

    def __neg__(self):
        return ScaledInteger(self.base, -self.value, self.scale)

    def __abs__(self):
        return ScaledInteger(self.base, abs(self.value), self.scale)

    def _align(self, other: "ScaledInteger") -> tuple[int, int, int]:
        if not isinstance(other, ScaledInteger):
            return NotImplemented
        if other.base != self.base:
            raise BaseMismatchError(f"base {self.base} vs base {other.base}")
        s = max(self.scale, other.scale)
        return self.rescale(s), other.rescale(s), s

    def __add__(self, other):
        a, b, s = self._align(other)
        return ScaledInteger(self.base, a + b, s)

    def __sub__(self, other):
        a, b, s = self._align(other)
        return ScaledInteger(self.base, a - b, s)

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __repr__(self):
        return f"ScaledInteger({self.value}/{self.base}^{self.scale})"


def compare(x: ScaledInteger, y: ScaledInteger) -> int:
    """Return -1, 0 or 1 by cross-scaling; bases must agree."""
    if x.base != y.base:
        raise BaseMismatchError(f"cannot compare base {x.base} with base {y.base}")
    s = max(x.scale, y.scale)
    a, b = x.rescale(s), y.rescale(s)
    return (a > b) - (a < b)


def accumulate_terms(base: int, terms: Iterable[tuple[int, int]], scale: int) -> ScaledInteger:
    """Exact ``sum(c * base**-n)`` for ``(n, c)`` in ``terms``, built at ``scale``."""
    _check_base(base)
    coeffs: dict[int, int] = {}
    for n, c in terms:
        if n > scale:
            raise ValueError(f"position {n} is beyond scale {scale}")
        if n < 0:
            raise ValueError(f"position {n} is negative")
        coeffs[n] = coeffs.get(n, 0) + c
    if not coeffs:
        return ScaledInteger(base, 0, 0)
    lo = min(coeffs)
    if len(coeffs) * 8 >= scale - lo + 1:
        # dense: Horner from the leading position
        acc = 0
        for n in range(lo, scale + 1):
            acc = acc * base + coeffs.get(n, 0)
        return ScaledInteger(base, acc, scale)
    return ScaledInteger(base, sum(c * base ** (scale - n) for n, c in coeffs.items()), scale)


@dataclass(frozen=True)
class DigitString:
    """Sign, integer part and fractional digits; ``digits[0]`` is position 1."""

    base: int
    sign: int
    integer_part: int
    digits: tuple[int, ...]

    def __post_init__(self):
        _check_base(self.base)
        object.__setattr__(self, "digits", tuple(self.digits))
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.integer_part < 0:
            raise ValueError("integer part must be non-negative")
        if any(not 0 <= d < self.base for d in self.digits):
            raise ValueError(f"digit out of range for base {self.base}")
        if self.sign == -1 and self.integer_part == 0 and not any(self.digits):
            raise ValueError("zero cannot carry a negative sign")

    def __len__(self):
        return len(self.digits)

    def padded(self, length: int) -> tuple[int, ...]:
        """Digits 1..length, extending a finite expansion with zeros."""
        d = self.digits[:length]
        return d + (0,) * (length - len(d))


def to_digits(x: ScaledInteger) -> DigitString:
    b = x.base
    sign = -1 if x.value < 0 else 1
    integer, frac = divmod(abs(x.value), b**x.scale)
    digits = list(int_digits(frac, b, x.scale))
    while digits and digits[-1] == 0:
        digits.pop()
    return DigitString(b, sign, integer, tuple(digits))


def int_digits(n: int, base: int, width: int) -> tuple[int, ...]:
    """Base-``base`` digits of ``0 <= n < base**width``, most significant first."""
    if width == 0:
        return ()
    if base <= 62:
        s = gmpy2.mpz(n).digits(base)
        vals = tuple(int(ch, 36) if base <= 36 else _B62.index(ch) for ch in s)
    else:
        out = []
        while n:
            n, d = divmod(n, base)
            out.append(d)
        vals = tuple(reversed(out)) or (0,)
    if vals == (0,):
        vals = ()
    if len(vals) > width:
        raise ValueError("value does not fit in the requested width")
    return (0,) * (width - len(vals)) + vals


_B62 = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"


def from_digits(ds: DigitString) -> ScaledInteger:
    acc = ds.integer_part
    for d in ds.digits:
        acc = acc * ds.base + d
    return ScaledInteger(ds.base, ds.sign * acc, len(ds.digits))


def digit_at(x: ScaledInteger, position: int) -> int:
    """Fractional digit of ``|x|`` at ``position`` >= 1."""
    if position > x.scale:
        return 0
    return (abs(x.value) // x.base ** (x.scale - position)) % x.base


class CommonPrefix(NamedTuple):
    digits: DigitString
    length: int
    exact: bool
    integer_certified: bool = True


def certified_common_prefix(lo: ScaledInteger, hi: ScaledInteger) -> CommonPrefix:
    """Longest digit prefix shared by every value in ``[lo, hi]``.

    Both ends must be non-negative.  ``length`` counts fractional digits; if
    the interval straddles an integer it is 0 and ``integer_certified`` is
    False.  For a point interval the exact expansion is returned with
    ``exact=True``.
    """
    if compare(lo, hi) > 0:
        raise EmptyIntervalError(f"{lo} > {hi}")
    if lo.value < 0:
        raise ValueError("certified_common_prefix needs lo >= 0; split signed intervals at zero")
    b = lo.base
    if compare(lo, hi) == 0:
        ds = to_digits(lo)
        return CommonPrefix(ds, len(ds.digits), True)

    s = max(lo.scale, hi.scale)
    a, c = lo.rescale(s), hi.rescale(s)
    unit = b**s
    if a // unit != c // unit:
        return CommonPrefix(DigitString(b, 1, a // unit, ()), 0, False, False)

    # floor(z * b**L) is monotone in z, so a prefix of length L is shared by
    # the whole interval iff it is shared by both ends.  The shared length
    # is bounded by s + (bits of the gap), so binary search up to there.
    def agree(L: int) -> bool:
        if L <= s:
            d = b ** (s - L)
            return a // d == c // d
        return False

    lo_L, hi_L = 0, s
    while lo_L < hi_L:
        mid = (lo_L + hi_L + 1) // 2
        if agree(mid):
            lo_L = mid
        else:
            hi_L = mid - 1
    L = lo_L
    head = a // b ** (s - L)
    integer, frac = divmod(head, b**L)
    return CommonPrefix(DigitString(b, 1, integer, int_digits(frac, b, L)), L, False)


# -- digit files ------------------------------------------------------------

DIGITS_PER_LINE = 64


def format_digit_file(ds: DigitString, certified: int | None) -> str:
    """Serialize; ``certified=None`` marks an exact expansion."""
    lines = [
        f"base {ds.base}",
        f"sign {'+' if ds.sign > 0 else '-'}",
        f"integer {ds.integer_part}",
        f"certified {'exact' if certified is None else certified}",
    ]
    d = ds.digits
    for i in range(0, len(d), DIGITS_PER_LINE):
        lines.append(" ".join(map(str, d[i:i + DIGITS_PER_LINE])))
    return "\n".join(lines) + "\n"


def parse_digit_file(text: str) -> tuple[DigitString, int | None]:
    lines = text.splitlines()
    if len(lines) < 4:
        raise ValueError("digit file needs at least four header lines")

    def field(line: str, key: str) -> str:
        k, _, v = line.partition(" ")
        if k != key:
            raise ValueError(f"expected '{key}' line, got {line!r}")
        return v.strip()

    base = int(field(lines[0], "base"))
    sign_s = field(lines[1], "sign")
    if sign_s not in "+-" or len(sign_s) != 1:
        raise ValueError(f"bad sign {sign_s!r}")
    integer = int(field(lines[2], "integer"))
    cert_s = field(lines[3], "certified")
    certified = None if cert_s == "exact" else int(cert_s)
    digits: list[int] = []
    for line in lines[4:]:
        if line.strip():
            digits.extend(int(t) for t in line.split(" "))
    ds = DigitString(base, 1 if sign_s == "+" else -1, integer, tuple(digits))
    return ds, certified


def digits_of_fraction(q: Fraction, base: int, n: int) -> tuple[int, tuple[int, ...]]:
    """Integer part and first ``n`` digits of ``|q|`` (reference helper)."""
    q = abs(Fraction(q))
    integer = q.numerator // q.denominator
    rem = q.numerator % q.denominator
    out = []
    for _ in range(n):
        rem *= base
        d, rem = divmod(rem, q.denominator)
        out.append(d)
    return integer, tuple(out)
