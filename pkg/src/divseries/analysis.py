"""Digit-stream forensics: zero runs, run-window prediction, periodicity."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import ceil_log, valuation
from .digits import DigitString
from .series import CertifiedPrefix, SeriesSpec


class PrefixTooShort(ValueError):
    def __init__(self, needed, have):
        super().__init__(f"need {needed} certified digits, have {have}")
        self.needed = needed
        self.have = have


@dataclass(frozen=True)
class ZeroRun:
    start: int
    length: int
    preceded_by_nonzero: bool
    within_certified: bool

    @property
    def end(self) -> int:
        return self.start + self.length - 1


def _unpack(source, certified_length=None):
    """Return (digits, certified length, base, integer part, exact)."""
    if isinstance(source, CertifiedPrefix):
        ds, exact = source.digits, source.exact
        n = len(ds.digits) if exact else source.certified_length
    elif isinstance(source, DigitString):
        ds, exact = source, False
        n = len(ds.digits) if certified_length is None else certified_length
    else:
        raise TypeError("expected a CertifiedPrefix or DigitString")
    return np.asarray(ds.padded(n), dtype=np.int64), n, ds.base, ds.integer_part, exact


def find_zero_runs(source, min_len: int = 1, *, certified_length: int | None = None) -> list[ZeroRun]:
    """Maximal zero runs of length >= ``min_len`` among the certified digits.

    A run that reaches the last certified digit may continue past it; it is
    reported truncated with ``within_certified=False``.  Exact expansions end
    in zeros by convention, so their digit list has no such boundary.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    digits, n, base, integer, exact = _unpack(source, certified_length)
    if n == 0:
        return []
    z = np.concatenate(([0], (digits == 0).astype(np.int8), [0]))
    edges = np.diff(z)
    starts = np.flatnonzero(edges == 1)  # 0-based index of first zero
    stops = np.flatnonzero(edges == -1)  # one past the last zero
    runs = []
    for s, e in zip(starts.tolist(), stops.tolist()):
        length = e - s
        if length < min_len:
            continue
        if s == 0:
            before = integer % base != 0
        else:
            before = True  # maximal run: the digit before it is non-zero
        touches_end = e == n and not exact
        runs.append(ZeroRun(s + 1, length, before, not touches_end))
    return runs


# -- run prediction ---------------------------------------------------------

@dataclass(frozen=True)
class RunPrediction:
    nonzero_window: tuple[int, int]  # the forced non-zero digit lies here
    run_start_window: tuple[int, int]  # so the zero run starts here
    guaranteed_run_length: int
    status: str  # "certified", "heuristic" or "vacuous"
    margin: Fraction  # bound on b**n_star * (tail from r + m0 A + k on)
    note: str = ""

    def contains(self, run: ZeroRun) -> bool:
        lo, hi = self.run_start_window
        return lo <= run.start <= hi and run.preceded_by_nonzero


def nominal_margin(base: int, max_abs: int, j0: int, k: int) -> Fraction:
    """``max|a| * b**(j0 - k/2)``; for odd ``k`` rounded up to a rational bound."""
    if k % 2 == 0:
        return Fraction(max_abs) * Fraction(base) ** (j0 - k // 2)
    # b**(1/2) <= b/c for the largest c with c*c <= b
    c = math.isqrt(base)
    return Fraction(max_abs) * Fraction(base) ** (j0 - (k + 1) // 2) * Fraction(base, c)


def run_length_from_margin(base: int, margin: Fraction) -> int:
    """Largest ``L >= 0`` with ``margin * b**L < 1``; -1 if even ``L = 0`` fails."""
    if margin >= 1:
        return -1
    L = 0
    while margin * base ** (L + 1) < 1:
        L += 1
    return L


def predict_run_window(cert, spec: SeriesSpec, *, strict: bool = True) -> RunPrediction:
    """Where the certificate forces a zero run, and how long it must be.

    With ``P0 = r + m0*A`` and ``n* = P0 + j0`` prime, every term before
    ``P0 + k`` other than ``n*`` is a multiple of ``b**-P0``, and
    ``d(n*) a_{n*} / b**n* = 2 a / b**n*`` has its lowest non-zero digit at
    ``n* - v_b(2a)``, inside ``[P0, P0 + j0]``.  If the remaining tail is
    below ``b**(-n* - L)`` no carry reaches that digit and the next
    ``v_b(2a) + L`` digits are zero.  This needs every coefficient from
    ``P0`` on to share one sign; otherwise the result is only heuristic.
    """
    plan = cert.plan
    if plan.base != spec.base:
        raise ValueError("series base differs from plan base")
    b, k, j0 = plan.base, plan.k, plan.j0
    P0 = plan.r + cert.m0 * plan.A
    n_star = P0 + j0
    window = (P0, P0 + j0)
    starts = (P0 + 1, P0 + j0 + 1)

    if cert.tail_margin is not None:
        margin, status = cert.tail_margin, "certified"
    elif strict:
        raise ValueError("certificate has no certified tail margin; pass strict=False for a heuristic")
    else:
        margin, status = nominal_margin(b, spec.max_abs, j0, k), "heuristic"

    a_star = spec.coefficient(n_star)
    notes = []
    if j0 >= k:
        return RunPrediction(window, starts, 0, "vacuous", margin, "exceptional slot outside the block")
    if a_star == 0 or 2 * abs(a_star) >= b**j0:
        return RunPrediction(window, starts, 0, "vacuous", margin, "2|a| does not fit below b**j0")
    if spec.tail_sign(P0 - 1) == 0:
        status = "heuristic" if status == "certified" else status
        notes.append("mixed-sign coefficients: borrows may turn zeros into b-1 digits")
    L = run_length_from_margin(b, margin)
    if L < 0:
        return RunPrediction(window, starts, 0, "vacuous", margin, "tail too large to protect the prime digit")
    guaranteed = valuation(2 * abs(a_star), b) + L
    if guaranteed <= 0:
        return RunPrediction(window, starts, guaranteed, "vacuous", margin, "no zero digit is forced")
    return RunPrediction(window, starts, guaranteed, status, margin, "; ".join(notes))


def formula_run_length(k: int, b: int, max_abs: int) -> int:
    """``floor(k/2) - ceil(log_b(2 max|a|)) - 1``, the closed-form run length."""
    return k // 2 - ceil_log(2 * max_abs, b) - 1


# -- periodicity ------------------------------------------------------------

@dataclass
class PeriodicityVerdict:
    prefix_length: int
    max_preperiod: int
    max_period: int
    survivors: list[tuple[int, int]] = field(default_factory=list)
    witnesses: dict[int, int] = field(default_factory=dict)  # period -> last mismatch position

    @property
    def rejected_all(self) -> bool:
        return not self.survivors

    def summary(self) -> str:
        if self.survivors:
            return f"{len(self.survivors)} (preperiod, period) pairs fit the first {self.prefix_length} digits"
        return (f"no rational with preperiod <= {self.max_preperiod} and period <= "
                f"{self.max_period} admits this {self.prefix_length}-digit prefix")

    def to_json(self) -> str:
        return json.dumps({
            "L": self.prefix_length,
            "S": self.max_preperiod,
            "P": self.max_period,
            "survivors": [list(sp) for sp in self.survivors],
        })


def _is_periodic(d: np.ndarray, s: int, p: int) -> bool:
    return bool(np.array_equal(d[s:len(d) - p], d[s + p:]))


def periodicity_scan(source, S: int, P: int, *, length: int | None = None) -> PeriodicityVerdict:
    """All ``(s, p)`` with ``s <= S``, ``p <= P`` such that digits ``s+1..L`` have period ``p``.

    Needs ``S + 2P <= L`` so that at least two full periods follow every
    candidate preperiod.
    """
    if S < 0 or P < 1:
        raise ValueError("need S >= 0 and P >= 1")
    if isinstance(source, CertifiedPrefix):
        if length is None:
            length = max(len(source.digits), S + 2 * P) if source.exact else source.certified_length
        L = length
        if L > source.certified_length and not source.exact:
            raise PrefixTooShort(L, source.certified_length)
        d = source.digit_array(L)
    elif isinstance(source, DigitString):
        L = len(source.digits) if length is None else length
        d = np.asarray(source.padded(L), dtype=np.int64)
    else:
        d = np.asarray(source, dtype=np.int64)
        L = len(d) if length is None else length
        d = d[:L]
    if S + 2 * P > L:
        raise PrefixTooShort(S + 2 * P, L)

    verdict = PeriodicityVerdict(L, S, P)
    for p in range(1, P + 1):
        # positions i (1-based) with d_i != d_{i+p}
        bad = np.flatnonzero(d[:L - p] != d[p:L])
        last = int(bad[-1]) + 1 if bad.size else 0
        verdict.witnesses[p] = last
        for s in range(last, S + 1):
            verdict.survivors.append((s, p))
    verdict.survivors.sort()
    return verdict


def recheck(verdict: PeriodicityVerdict, source) -> bool:
    """Independently re-verify every survivor and every stored witness."""
    if isinstance(source, CertifiedPrefix):
        d = source.digit_array(verdict.prefix_length)
    elif isinstance(source, DigitString):
        d = np.asarray(source.padded(verdict.prefix_length))
    else:
        d = np.asarray(source)[:verdict.prefix_length]
    alive = set(verdict.survivors)
    for p in range(1, verdict.max_period + 1):
        w = verdict.witnesses[p]
        if w and d[w - 1] == d[w - 1 + p]:
            return False
        for s in range(verdict.max_preperiod + 1):
            if ((s, p) in alive) != _is_periodic(d, s, p):
                return False
    return True
