"""Number-theoretic kernel: divisor counts, primality, primes, CRT, valuations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

SIEVE_BUDGET = 200_000_000  # max N accepted by the sieves
TRIAL_DIVISION_BOUND = 10**8  # largest trial divisor tried by factorize()


class ResourceError(RuntimeError):
    pass


class UnfactoredError(ArithmeticError):
    """Trial division gave up before fully factoring ``n``."""

    def __init__(self, n, cofactor, bound):
        super().__init__(f"{n} has cofactor {cofactor} with no factor <= {bound}")
        self.n = n
        self.cofactor = cofactor
        self.bound = bound


class NonCoprimeModuliError(ValueError):
    def __init__(self, i, j, mi, mj):
        super().__init__(f"moduli #{i}={mi} and #{j}={mj} share factor {math.gcd(mi, mj)}")
        self.pair = (i, j)


def _check_budget(n: int, budget: int | None) -> None:
    budget = SIEVE_BUDGET if budget is None else budget
    if n > budget:
        raise ResourceError(f"sieve length {n} exceeds budget {budget}")


# -- sieves -----------------------------------------------------------------

def divisor_sieve(N: int, budget: int | None = None) -> np.ndarray:
    """``d(n)`` for ``n = 1..N``; entry ``i`` holds ``d(i + 1)``.

    Plain additive sieve: every ``i`` bumps each of its multiples.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_budget(N, budget)
    d = np.zeros(N + 1, dtype=np.int32)
    half = N // 2
    for i in range(1, half + 1):
        d[i::i] += 1
    # i in (N/2, N] has the single multiple i itself
    d[half + 1:] += 1
    return d[1:]


def prime_sieve(N: int, budget: int | None = None) -> np.ndarray:
    """Boolean array ``is_prime[0..N]``."""
    _check_budget(N, budget)
    flags = np.ones(max(N + 1, 2), dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return flags[:N + 1]


@lru_cache(maxsize=8)
def _small_primes(limit: int) -> np.ndarray:
    return np.flatnonzero(prime_sieve(limit))


def primes_up_to(n: int) -> list[int]:
    return _small_primes(n).tolist() if n >= 2 else []


def divisor_counts_window(lo: int, hi: int, budget: int | None = None) -> np.ndarray:
    """``d(n)`` for ``lo <= n <= hi`` via a segmented factor sieve."""
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= lo <= hi")
    length = hi - lo + 1
    _check_budget(length, budget)
    _check_budget(math.isqrt(hi), budget)
    rest = np.arange(lo, hi + 1, dtype=object if hi >= 2**62 else np.int64)
    d = np.ones(length, dtype=np.int64)
    for p in _small_primes(max(math.isqrt(hi), 2)).tolist():
        start = (-lo) % p
        if start >= length:
            continue
        e = np.zeros(length, dtype=np.int64)
        pk = p
        while pk <= hi:
            s = (-lo) % pk
            if s >= length:
                break
            e[s::pk] += 1
            pk *= p
        idx = np.flatnonzero(e)
        d[idx] *= e[idx] + 1
        rest[idx] //= np.asarray(p, dtype=rest.dtype) ** e[idx].astype(rest.dtype)
    d[rest > 1] *= 2
    return d


# -- factorization ----------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def divisor_count(self) -> int:
        return math.prod(e + 1 for _, e in self.factors)

    def value(self) -> int:
        return math.prod(p**e for p, e in self.factors)


def factorize(n: int, bound: int | None = None) -> Factorization:
    """Trial-division factorization; raises :class:`UnfactoredError` past ``bound``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bound = TRIAL_DIVISION_BOUND if bound is None else bound
    factors = []
    m = n
    for p in (2, 3):
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            factors.append((p, e))
    p, step = 5, 2
    cofactor_prime = m < 2**64 and primality(m) == "prime"
    while p * p <= m and not cofactor_prime:
        if p > bound:
            raise UnfactoredError(n, m, bound)
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
            # a proven-prime cofactor ends the search early
            cofactor_prime = m < 2**64 and primality(m) == "prime"
        p += step
        step = 6 - step
    if m > 1:
        factors.append((m, 1))
    return Factorization(n, tuple(factors))


def divisor_count(n: int, bound: int | None = None) -> int:
    """``d(n)`` from the prime factorization of ``n``."""
    return factorize(n, bound).divisor_count()


def divisor_count_array(ns: np.ndarray) -> np.ndarray:
    """Vectorized ``d(n)`` by repeated division with a smallest-prime-factor table."""
    ns = np.asarray(ns, dtype=np.int64)
    top = int(ns.max()) if ns.size else 1
    _check_budget(top, None)
    spf = np.zeros(top + 1, dtype=np.int64)
    for p in _small_primes(max(math.isqrt(top), 2)).tolist():
        block = spf[p * p::p]
        block[block == 0] = p
    rest = ns.copy()
    d = np.ones_like(ns)
    last = np.zeros_like(ns)
    run = np.zeros_like(ns)
    while True:
        live = rest > 1
        if not live.any():
            break
        q = spf[rest]
        q = np.where(q == 0, rest, q)  # prime remainder
        q = np.where(live, q, 0)
        same = live & (q == last)
        new = live & ~same
        # close out the previous prime's run before starting a new one
        d[new] *= run[new] + 1
        run[new] = 1
        run[same] += 1
        last = np.where(live, q, last)
        rest = np.where(live, rest // np.maximum(q, 1), rest)
    d *= np.where(run > 0, run + 1, 1)
    return d


# -- primality --------------------------------------------------------------

_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)
PROBABLE_ROUNDS = 32


def _strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def primality(n: int) -> str:
    """Classify ``n`` as ``"prime"``, ``"composite"`` or ``"probable-prime"``.

    Below 2**64 the first twelve prime bases make Miller-Rabin deterministic.
    Above that, ``PROBABLE_ROUNDS`` extra bases drawn deterministically from
    ``n`` are used and a pass is only reported as probable.
    """
    if n < 2:
        return "composite"
    for p in _TRIAL_PRIMES:
        if n % p == 0:
            return "prime" if n == p else "composite"
    if n < _TRIAL_PRIMES[-1] ** 2:
        return "prime"
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES_64:
        if not _strong_probable_prime(n, a, d, s):
            return "composite"
    if n < 2**64:
        return "prime"
    x = n % (2**61 - 1)
    for _ in range(PROBABLE_ROUNDS):
        x = (x * 6364136223846793005 + 1442695040888963407) % 2**64
        a = 2 + x % (n - 3)
        if not _strong_probable_prime(n, a, d, s):
            return "composite"
    return "probable-prime"


def is_prime(n: int) -> bool:
    """Exact below 2**64; probabilistic (see :func:`primality`) above."""
    return primality(n) != "composite"


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes ``p`` with ``lo < p <= hi``."""
    if hi <= lo or hi < 2:
        return []
    if hi - lo <= 10_000 and hi > 10**7:
        return [n for n in range(lo + 1, hi + 1) if is_prime(n)]
    flags = prime_sieve(hi)
    return (np.flatnonzero(flags[lo + 1:]) + lo + 1).tolist()


def next_primes_after(floor: int, count: int) -> list[int]:
    """The ``count`` smallest primes strictly greater than ``floor``."""
    out: list[int] = []
    n = floor
    while len(out) < count:
        n += 1
        if is_prime(n):
            out.append(n)
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n).factors:
        result -= result // p
    return result


@dataclass(frozen=True)
class APCount:
    count: int
    reference: float  # N / (2 phi(d) log N), the comparison value


def prime_count_ap(N: int, d: int, a: int) -> APCount:
    """Number of primes ``p <= N`` with ``p % d == a``."""
    if d < 1 or not 0 <= a < d:
        raise ValueError("need d >= 1 and 0 <= a < d")
    if N < 2:
        return APCount(0, 0.0)
    primes = np.flatnonzero(prime_sieve(N))
    count = int(np.count_nonzero(primes % d == a))
    ref = N / (2 * euler_phi(d) * math.log(N)) if N > 1 else 0.0
    return APCount(count, ref)


# -- CRT and valuations -----------------------------------------------------

def crt_solve(congruences: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Solve ``x = r_i (mod m_i)`` for pairwise coprime ``m_i``; returns ``(x, prod m_i)``."""
    mods = [m for _, m in congruences]
    for i in range(len(mods)):
        if mods[i] < 1:
            raise ValueError(f"modulus #{i} must be positive")
        for j in range(i + 1, len(mods)):
            if math.gcd(mods[i], mods[j]) != 1:
                raise NonCoprimeModuliError(i, j, mods[i], mods[j])
    x, M = 0, 1
    for r, m in congruences:
        # lift x mod M to x mod M*m
        t = ((r - x) * pow(M, -1, m)) % m if m > 1 else 0
        x += M * t
        M *= m
    return x % M, M


def valuation(n: int, p: int) -> int:
    """Exponent ``e`` with ``p**e`` exactly dividing ``n``."""
    if n < 1 or p < 2:
        raise ValueError("need n >= 1 and p >= 2")
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def ceil_log(x: int, base: int) -> int:
    """Smallest ``e >= 0`` with ``base**e >= x`` (exact integer ``ceil(log_base x)``)."""
    e, power = 0, 1
    while power < x:
        power *= base
        e += 1
    return e
