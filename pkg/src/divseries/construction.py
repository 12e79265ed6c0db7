"""CRT congruence plans, their verification, and the search for a prime slot.

A plan fixes ``k`` consecutive offsets ``j = 0..k-1`` and gives each offset
except ``j0`` a block of primes.  The residue ``r`` is chosen so that every
prime ``p`` in block ``j`` divides ``r + j`` exactly ``b - 1`` times, and the
modulus ``A`` is the product of ``p**b`` over all block primes.  Then for
every ``m`` the number ``r + m*A + j`` has ``d(.)`` divisible by
``b**len(block j)``, while ``r + m*A + j0`` stays free to be prime.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .arith import (
    ResourceError,
    UnfactoredError,
    crt_solve,
    divisor_count,
    next_primes_after,
    primality,
    valuation,
)
from .series import SeriesSpec, Verdict, margin_threshold, tail_compare, tail_enclosure

PAPER_FAITHFUL = "paper_faithful"
CLAIMED_STRENGTH = "claimed_strength"
MODES = (PAPER_FAITHFUL, CLAIMED_STRENGTH)
MAX_MODULUS_BITS = 1 << 20
PLAN_SCHEMA = 1


class PlanError(ValueError):
    pass


class SearchExhausted(RuntimeError):
    def __init__(self, m_limit, primality_failures, divisibility_failures, tail_failures=0):
        super().__init__(
            f"no m0 below {m_limit}: {primality_failures} composite, "
            f"{divisibility_failures} divisibility, {tail_failures} tail failures"
        )
        self.m_limit = m_limit
        self.primality_failures = primality_failures
        self.divisibility_failures = divisibility_failures
        self.tail_failures = tail_failures


def choose_k(log_n) -> int:
    """Largest ``k`` with ``k**10 <= log_n`` (exact for rational input)."""
    q = Fraction(log_n)
    if q <= 0:
        raise ValueError("log N must be positive")
    # k**10 is an integer, so k**10 <= q iff k**10 <= floor(q)
    return int(gmpy2.iroot(gmpy2.mpz(q.numerator // q.denominator), 10)[0])


def choose_j0(b: int, alphabet) -> int:
    """Smallest ``j0 >= 0`` with ``2 * max|a| < b**j0``."""
    alphabet = set(alphabet)
    if not alphabet:
        raise ValueError("alphabet must be non-empty")
    if 0 in alphabet:
        raise ValueError("alphabet contains 0; the prime-slot argument needs non-zero coefficients")
    if b < 2:
        raise ValueError("base must be >= 2")
    bound = 2 * max(abs(a) for a in alphabet)
    j0, power = 0, 1
    while power <= bound:
        power *= b
        j0 += 1
    return j0


def slot_size(j: int, mode: str) -> int:
    if mode == PAPER_FAITHFUL:
        return j
    if mode == CLAIMED_STRENGTH:
        return j + 1
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class CrtPlan:
    base: int
    k: int
    j0: int
    prime_floor: int
    slots: tuple[tuple[int, ...], ...]
    mode: str
    A: int
    r: int

    def slot_exponent(self, j: int) -> int:
        """Power of ``base`` claimed to divide ``d(r + mA + j)``; 0 for ``j0``."""
        if j == self.j0:
            return 0
        return slot_size(j, self.mode)

    def constrained_slots(self):
        """Slots with a non-trivial exponent (``paper_faithful`` leaves slot 0 empty)."""
        return [j for j in range(self.k) if self.slot_exponent(j) > 0]

    @property
    def primes(self) -> list[int]:
        return [p for s in self.slots for p in s]

    def check(self) -> list[str]:
        """Re-derive every plan invariant; returns a list of violations."""
        bad = []
        ps = self.primes
        if len(set(ps)) != len(ps):
            bad.append("slot primes are not distinct")
        if any(p <= self.prime_floor for p in ps):
            bad.append("slot prime not above prime_floor")
        if self.j0 < self.k and self.slots[self.j0]:
            bad.append("exceptional slot has primes")
        if math.prod(p**self.base for p in ps) != self.A:
            bad.append("A is not the product of p**b")
        if not 0 <= self.r < self.A:
            bad.append("r outside [0, A)")
        for j, slot in enumerate(self.slots):
            if j != self.j0 and len(slot) != slot_size(j, self.mode):
                bad.append(f"slot {j} has {len(slot)} primes")
            for p in slot:
                if valuation(self.r + j, p) != self.base - 1:
                    bad.append(f"p={p} does not divide r+{j} exactly {self.base - 1} times")
        if math.gcd(self.r + self.j0, self.A) != 1:
            bad.append("gcd(r + j0, A) != 1")
        return bad

    def to_json(self) -> str:
        return json.dumps(
            {
                "base": self.base,
                "k": self.k,
                "j0": self.j0,
                "mode": self.mode,
                "prime_floor": self.prime_floor,
                "slots": [list(s) for s in self.slots],
                "A": str(self.A),
                "r": str(self.r),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str | dict) -> "CrtPlan":
        d = json.loads(text) if isinstance(text, str) else text
        return cls(
            base=int(d["base"]),
            k=int(d["k"]),
            j0=int(d["j0"]),
            prime_floor=int(d["prime_floor"]),
            slots=tuple(tuple(int(p) for p in s) for s in d["slots"]),
            mode=d["mode"],
            A=int(d["A"]),
            r=int(d["r"]),
        )


def build_plan(b: int, k: int, j0: int, prime_floor: int, mode: str = CLAIMED_STRENGTH,
               max_bits: int = MAX_MODULUS_BITS) -> CrtPlan:
    """Assign consecutive primes above ``prime_floor`` to slots and solve for ``r``.

    Slot ``j`` takes the next block of ``j`` (or ``j + 1``) primes in
    ascending order.  The block belonging to ``j0`` is still reserved, so
    later slots keep their positions, but its primes are left out of ``A``.
    """
    if b < 2 or k < 1 or j0 < 0:
        raise ValueError("need b >= 2, k >= 1, j0 >= 0")
    sizes = [slot_size(j, mode) for j in range(k)]
    pool = next_primes_after(prime_floor, sum(sizes))
    bits = sum(b * math.log2(p) for j, n in enumerate(sizes) if j != j0
               for p in pool[sum(sizes[:j]):sum(sizes[:j]) + n])
    if bits > max_bits:
        raise ResourceError(f"modulus A would need about {bits:.0f} bits (budget {max_bits})")

    slots, congruences, pos = [], [], 0
    for j, n in enumerate(sizes):
        block = tuple(pool[pos:pos + n])
        pos += n
        if j == j0:
            slots.append(())
            continue
        slots.append(block)
        if block:
            P = math.prod(block)
            modulus = P**b
            congruences.append(((P ** (b - 1) - j) % modulus, modulus))
    r, A = crt_solve(congruences) if congruences else (0, 1)
    plan = CrtPlan(b, k, j0, prime_floor, tuple(slots), mode, A, r)
    if math.gcd(r + j0, A) != 1:
        raise PlanError(f"gcd(r + j0, A) > 1; prime_floor {prime_floor} is too small for k={k}, j0={j0}")
    return plan


# -- verification -----------------------------------------------------------

@dataclass(frozen=True)
class SlotCheck:
    m: int
    j: int
    n: int
    target: int  # exponent the plan claims
    found: int | None  # exact exponent of b in d(n); None when unfactored
    status: str  # "pass", "fail" or "unverified"
    meets_j_plus_1: bool | None  # does d(n) also reach b**(j+1)?


@dataclass
class VerifyReport:
    plan: CrtPlan
    checks: list[SlotCheck] = field(default_factory=list)
    coprime: bool = True

    @property
    def passed(self) -> bool:
        return self.coprime and all(c.status == "pass" for c in self.checks)

    @property
    def failures(self) -> list[SlotCheck]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def unverified(self) -> list[SlotCheck]:
        return [c for c in self.checks if c.status == "unverified"]

    def to_csv(self) -> str:
        out = ["m,j,n,target_exponent,found_exponent,status,meets_j_plus_1"]
        for c in self.checks:
            found = "" if c.found is None else c.found
            meets = "" if c.meets_j_plus_1 is None else str(c.meets_j_plus_1).lower()
            out.append(f"{c.m},{c.j},{c.n},{c.target},{found},{c.status},{meets}")
        return "\n".join(out) + "\n"


def _b_exponent(x: int, b: int) -> int:
    e = 0
    while x % b == 0:
        x //= b
        e += 1
    return e


def _check_one(args) -> SlotCheck:
    plan, m, j, bound = args
    n = plan.r + m * plan.A + j
    t = plan.slot_exponent(j)
    try:
        dn = divisor_count(n, bound)
    except UnfactoredError:
        return SlotCheck(m, j, n, t, None, "unverified", None)
    e = _b_exponent(dn, plan.base)
    return SlotCheck(m, j, n, t, e, "pass" if e >= t else "fail", e >= j + 1)


def verify_plan(plan: CrtPlan, m_range, *, factor_bound: int | None = None, workers: int = 1) -> VerifyReport:
    """Check ``b**t(j) | d(r + mA + j)`` by full factorization for each ``m`` and slot."""
    jobs = [(plan, m, j, factor_bound) for m in m_range for j in plan.constrained_slots()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            checks = list(pool.map(_check_one, jobs, chunksize=64))
    else:
        checks = [_check_one(job) for job in jobs]
    return VerifyReport(plan, checks, math.gcd(plan.r + plan.j0, plan.A) == 1)


# -- m0 search --------------------------------------------------------------

@dataclass(frozen=True)
class M0Certificate:
    plan: CrtPlan
    m0: int
    n_star: int
    primality: str  # "prime" or "probable-prime"
    divisibility_checked_range: tuple[int, int]  # m values scanned, inclusive
    divisibility_basis: str  # "factored" or "structural"
    tail_rule: str
    tail_verdict: str  # "below", "above", "unresolved" or "unchecked"
    tail_margin: Fraction | None = None  # bound on b**n_star * sum_{n >= r+m0A+k} |d(n) a_n| / b**n

    def to_dict(self) -> dict:
        p = self.plan
        return {
            "plan": json.loads(p.to_json()),
            "m0": self.m0,
            "n_star": str(self.n_star),
            "primality": self.primality,
            "divisibility_checked_range": list(self.divisibility_checked_range),
            "divisibility_basis": self.divisibility_basis,
            "tail_rule": self.tail_rule,
            "tail_verdict": self.tail_verdict,
            "tail_margin": None if self.tail_margin is None else
            [str(self.tail_margin.numerator), str(self.tail_margin.denominator)],
        }


_FACTOR_CHECK_LIMIT = 10**14


def _slot_divisibility(plan: CrtPlan, m: int) -> tuple[bool, str]:
    """Does every constrained slot reach its exponent at this ``m``?"""
    base = plan.r + m * plan.A
    structural = all(
        valuation(base + j, p) == plan.base - 1
        for j in plan.constrained_slots() for p in plan.slots[j]
    )
    if not structural:
        return False, "structural"
    if base + plan.k <= _FACTOR_CHECK_LIMIT:
        ok = all(
            _b_exponent(divisor_count(base + j), plan.base) >= plan.slot_exponent(j)
            for j in plan.constrained_slots()
        )
        return ok, "factored"
    # each block prime contributes a factor (b - 1) + 1 = b to d(.)
    return True, "structural"


def find_m0(plan: CrtPlan, spec: SeriesSpec, m_limit: int, tail_rule: str = "off",
            *, budget: int = 4096) -> M0Certificate:
    """Smallest ``m < m_limit`` with ``r + mA + j0`` prime and every slot divisible.

    ``tail_rule="strict"`` also demands a certified small tail past
    ``r + k + mA``; ``"off"`` leaves the tail unchecked.
    """
    if m_limit < 1:
        raise ValueError("m_limit must be >= 1")
    if spec.base != plan.base:
        raise ValueError("series base differs from plan base")
    if tail_rule not in ("off", "strict"):
        raise ValueError(f"unknown tail rule {tail_rule!r}")
    composite = divis = tails = 0
    for m in range(m_limit):
        n_star = plan.r + m * plan.A + plan.j0
        kind = primality(n_star)
        if kind == "composite":
            composite += 1
            continue
        ok, basis = _slot_divisibility(plan, m)
        if not ok:
            divis += 1
            continue
        verdict, margin = "unchecked", None
        if tail_rule == "strict":
            offset = plan.r + m * plan.A
            theta, power = margin_threshold(plan.base, spec.max_abs, offset, plan.k)
            res = tail_compare(spec, offset + plan.k, theta, budget=budget, power=power)
            verdict = res.verdict.value
            if res.verdict is not Verdict.BELOW:
                tails += 1
                continue
            margin = prime_digit_margin(plan, spec, m, budget=budget)
        return M0Certificate(plan, m, n_star, kind, (0, m), basis, tail_rule, verdict, margin)
    raise SearchExhausted(m_limit, composite, divis, tails)


def prime_digit_margin(plan: CrtPlan, spec: SeriesSpec, m: int, *, budget: int = 4096) -> Fraction:
    """Upper bound on ``b**n_star * sum_{n >= r + mA + k} |d(n) a_n| / b**n``."""
    start = plan.r + m * plan.A + plan.k
    _, upper = tail_enclosure(spec, start - 1, min(budget, 64))
    shift = plan.j0 - plan.k + 1  # n_star - (start - 1)
    return upper * Fraction(plan.base) ** shift
