"""Factorization, the almost-prime census, and sieve-hypothesis checks."""

import functools
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from palinsieve.numeric import ilog, iroot, sum_deterministic
from palinsieve.palindromes import (
    Filter,
    PalConfig,
    enumerate_block,
    enumerate_palindromes,
)
from palinsieve.parallel import map_ordered
from palinsieve.util import DomainError, ResourceGuardError, get_setting, guard_memory

# Deterministic Miller-Rabin witnesses for every n < 3.3 * 10^24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_EXTRA_ROUNDS = 40

# Above this D the remainder sum skips the d with no multiple among the
# star palindromes and adds their share in closed form.
DIRECT_REMAINDER_LIMIT = 2**16


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    @property
    def big_omega(self) -> int:
        """Omega(n): prime factors counted with multiplicity."""
        return sum(e for _, e in self.factors)

    @property
    def smallest_prime(self) -> int | None:
        """P^-(n); None for n = 1, which has no prime factor."""
        return self.factors[0][0] if self.factors else None

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def divisors_up_to(self, limit: int) -> list[int]:
        """Divisors of n that are <= limit, ascending."""
        divs = [1]
        for p, e in self.factors:
            step = []
            for d in divs:
                m = d
                for _ in range(e):
                    m *= p
                    if m > limit:
                        break
                    step.append(m)
            divs += step
        return sorted(divs) if limit >= 1 else []


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit, by a boolean sieve of Eratosthenes."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    guard_memory(limit + 1, f"prime sieve up to {limit}")
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p : limit + 1 : p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@functools.lru_cache(maxsize=8)
def _trial_primes(cutoff: int) -> tuple[int, ...]:
    return tuple(int(p) for p in primes_up_to(cutoff))


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; exact below 3.3 * 10^24, 40 extra seeded rounds above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    def witness(a: int) -> bool:
        x = pow(a, d, n)
        if x in (1, n - 1):
            return False
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                return False
        return True

    bases = list(_MR_BASES)
    if n >= _MR_DETERMINISTIC_LIMIT:
        rng = random.Random(n)
        bases += [rng.randrange(2, n - 1) for _ in range(_MR_EXTRA_ROUNDS)]
    return not any(witness(a) for a in bases)


def pollard_brent(n: int, seed: int = 0) -> int:
    """A nontrivial factor of the composite n (Brent's cycle variant of rho)."""
    if n < 4 or is_probable_prime(n):
        raise DomainError(f"pollard_brent needs a composite, got {n}")
    if n % 2 == 0:
        return 2
    rng = random.Random(seed)
    while True:
        y = rng.randrange(1, n - 1)
        c = rng.randrange(1, n - 1)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g


def factorize(n: int, cutoff: int | None = None) -> Factorization:
    """Full prime factorization: trial division to ``cutoff``, then Brent-rho."""
    if n < 1:
        raise DomainError(f"factorize needs n >= 1, got {n}")
    max_bits = get_setting("max_factor_bits")
    if n.bit_length() > max_bits:
        raise ResourceGuardError(
            f"{n.bit_length()}-bit input exceeds the {max_bits}-bit factorization cap"
        )
    if cutoff is None:
        cutoff = get_setting("trial_division_cutoff")
    original = n
    found: dict[int, int] = {}
    for p in _trial_primes(cutoff):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            found[p] = e
    stack = [n] if n > 1 else []
    seed = 0
    while stack:
        m = stack.pop()
        if is_probable_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        d = pollard_brent(m, seed)
        seed += 1
        stack.extend((d, m // d))
    return Factorization(n=original, factors=tuple(sorted(found.items())))


def divisor_count(n: int) -> int:
    """tau(n)."""
    return math.prod(e + 1 for _, e in factorize(n).factors)


def totient(n: int) -> int:
    """Euler's phi(n)."""
    return math.prod((p - 1) * p ** (e - 1) for p, e in factorize(n).factors)


def delta_r(r: int) -> float:
    """r + log(3/4 * (1 + 3^-r)) / log 3, the sieve-dimension threshold for r primes."""
    if r < 2:
        raise DomainError(f"delta_r needs r >= 2, got {r}")
    return r + math.log(0.75 * (1 + 3.0**-r)) / math.log(3)


def sieve_weight(d: int, b: int) -> Fraction:
    """g(d) = 1/d when gcd(d, b^3 - b) = 1, else 0."""
    return Fraction(1, d) if math.gcd(d, b**3 - b) == 1 else Fraction(0)


@dataclass(frozen=True)
class SieveReport:
    b: int
    x: int
    r: int
    z: int
    total_pal: int
    qualifying: int
    ratio: float
    remainder_sum: float
    delta6_margin: float


def _census_block(task: tuple[int, int, int, int, int]) -> tuple[int, int]:
    b, length, x, r, z = task
    total = qualifying = 0
    for n in enumerate_block(PalConfig(b), length, x):
        total += 1
        fac = factorize(n)
        pminus = fac.smallest_prime
        if fac.big_omega <= r and (pminus is None or pminus >= z):
            qualifying += 1
    return total, qualifying


def census(
    b: int, x: int, r: int = 6, theta_inv: int = 21, workers: int = 1
) -> SieveReport:
    """Count palindromes n <= x with Omega(n) <= r and P^-(n) >= z = x^(1/theta_inv).

    Blocks of one digit length are factored independently; only integer
    counts cross process boundaries, so the report does not depend on
    ``workers``.
    """
    if b < 2 or x < 1 or r < 0 or theta_inv < 1:
        raise DomainError(
            f"census needs b >= 2, x >= 1, r >= 0, theta_inv >= 1; "
            f"got b={b}, x={x}, r={r}, theta_inv={theta_inv}"
        )
    z = iroot(x, theta_inv)
    lengths = range(1, ilog(x, b) + 2)
    parts = map_ordered(_census_block, [(b, L, x, r, z) for L in lengths], workers)
    total = sum(t for t, _ in parts)
    qualifying = sum(k for _, k in parts)
    ratio = qualifying * math.log(x) / total if total else 0.0
    check = hypothesis_check(b, x, theta_inv)
    margin = (
        Fraction(4, theta_inv) - 1 / Fraction(delta_r(max(r, 2))) - Fraction(1, 100)
    )
    return SieveReport(
        b=b,
        x=x,
        r=r,
        z=z,
        total_pal=total,
        qualifying=qualifying,
        ratio=ratio,
        remainder_sum=check.remainder_sum,
        delta6_margin=float(margin),
    )


def census_rows(b: int, x: int, r: int = 6, theta_inv: int = 21):
    """Yield (n, Omega(n), P^-(n), qualifies) for every palindrome n <= x."""
    z = iroot(x, theta_inv)
    for n in enumerate_palindromes(PalConfig(b), x):
        fac = factorize(n)
        pminus = fac.smallest_prime
        qualifies = fac.big_omega <= r and (pminus is None or pminus >= z)
        yield n, fac.big_omega, pminus, qualifies


@dataclass(frozen=True)
class RemainderTerm:
    d: int
    count: int
    expected: float
    remainder: float


def _divisor_counts(b: int, x: int, D: int) -> tuple[int, dict[int, int]]:
    """#P*(x) and A_d = #P*(x, 0, d) for every d <= D that divides some n."""
    counts: dict[int, int] = {}
    total = 0
    for n in enumerate_palindromes(PalConfig(b, Filter.STAR), x):
        total += 1
        for d in factorize(n).divisors_up_to(D):
            counts[d] = counts.get(d, 0) + 1
    return total, counts


def remainder_terms(b: int, x: int, D: int) -> list[RemainderTerm]:
    """r_d = #P*(x, 0, d) - g(d) * #P*(x) for each d <= D."""
    guard_memory(96 * max(D, 0), f"{D} remainder terms")
    total, counts = _divisor_counts(b, x, D)
    terms = []
    for d in range(1, D + 1):
        count = counts.get(d, 0)
        expected = sieve_weight(d, b) * total
        terms.append(
            RemainderTerm(
                d=d,
                count=count,
                expected=float(expected),
                remainder=float(count - expected),
            )
        )
    return terms


def coprime_harmonic(D: int, modulus: int) -> mpmath.mpf:
    """sum of 1/d over d <= D with gcd(d, modulus) = 1, by Moebius inversion."""
    primes = [p for p, _ in factorize(modulus).factors]
    total = mpmath.mpf(0)
    for k in range(len(primes) + 1):
        for combo in itertools.combinations(primes, k):
            e = math.prod(combo)
            if e <= D:
                total += (-1) ** k * mpmath.harmonic(D // e) / e
    return total


def remainder_sum(b: int, x: int, D: int) -> float:
    """sum_{d <= D} |r_d|.

    Every divisor of a star palindrome is coprime to b^3 - b, so the d with
    A_d = 0 contribute g(d) * #P*(x) each. Up to DIRECT_REMAINDER_LIMIT the
    terms are summed one by one; above it that tail is taken in closed form
    and only the d dividing some star palindrome are visited.
    """
    if D <= DIRECT_REMAINDER_LIMIT:
        return sum_deterministic(abs(t.remainder) for t in remainder_terms(b, x, D))
    total, counts = _divisor_counts(b, x, D)
    hit = sorted(counts)
    present = sum_deterministic(abs(counts[d] - total / d) for d in hit)
    with mpmath.workdps(30):
        seen = mpmath.fsum(mpmath.mpf(1) / d for d in hit)
        tail = coprime_harmonic(D, b**3 - b) - seen
        missing = float(total * tail)
    return present + missing


@dataclass(frozen=True)
class HypothesisCheck:
    b: int
    x: int
    D: int
    remainder_sum: float
    mertens_K: float


def mertens_constant(b: int, upper: int) -> float:
    """Smallest K >= 1 bounding prod_{u<=p<v} (1 - g(p))^-1 * log u / log v.

    u < v range over powers of two in [2, upper]; with no such pair the
    answer is 1.
    """
    grid = []
    t = 2
    while t <= upper:
        grid.append(t)
        t *= 2
    if len(grid) < 2:
        return 1.0
    primes = primes_up_to(grid[-1])
    modulus = b**3 - b
    g = np.where(modulus % primes == 0, 0.0, 1.0 / primes)
    prefix = np.concatenate(([0.0], np.cumsum(-np.log1p(-g))))
    S = [prefix[np.searchsorted(primes, u, side="left")] for u in grid]
    best = 1.0
    for i, u in enumerate(grid):
        for j in range(i + 1, len(grid)):
            v = grid[j]
            best = max(best, math.exp(S[j] - S[i]) * math.log(u) / math.log(v))
    return best


def hypothesis_check(b: int, x: int, theta_inv: int = 21) -> HypothesisCheck:
    """Level-of-distribution remainder sum up to D = x^(4/theta_inv), and K."""
    if b < 2 or x < 1:
        raise DomainError(f"hypothesis_check needs b >= 2 and x >= 1, got b={b}, x={x}")
    D = iroot(x**4, theta_inv)
    upper = min(x, get_setting("mertens_limit"))
    return HypothesisCheck(
        b=b,
        x=x,
        D=D,
        remainder_sum=remainder_sum(b, x, D),
        mertens_K=mertens_constant(b, upper),
    )
