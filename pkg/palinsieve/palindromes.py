"""Ascending enumeration of base-b palindromes and exact counts.

A palindrome with L digits is written through its half-digit vector:
n = sum_j d_j * w_j with pair weights w_j = b^j + b^(L-1-j) (the middle
weight is b^j alone when L is odd). The stream keeps the half digits as a
counter and updates the value by adding or subtracting weights, so each step
costs O(1) amortized arithmetic operations.
"""

import math
from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from palinsieve.numeric import ilog
from palinsieve.util import DomainError

# Frozen bound on |count_pi_star residual| / (b^2 * tau(b^2 - 1)).
C_STAR = 4


class Filter(str, Enum):
    ALL = "all"
    ODD_DIGITS = "odd"
    STAR = "star"


@dataclass(frozen=True)
class PalConfig:
    """Base and membership filter for a palindrome stream."""

    b: int
    filter: Filter = Filter.ALL

    def __post_init__(self):
        if self.b < 2:
            raise DomainError(f"base must be at least 2, got {self.b}")


def is_palindrome(n: int, b: int) -> bool:
    """True when the base-b digits of n read the same in both directions."""
    if n < 1 or b < 2:
        raise DomainError(f"is_palindrome needs n >= 1 and b >= 2, got n={n}, b={b}")
    digits = []
    while n:
        n, d = divmod(n, b)
        digits.append(d)
    return digits == digits[::-1]


def digit_weights(b: int, length: int) -> list[int]:
    """Pair weights w_j for the half digits of a ``length``-digit palindrome."""
    weights = []
    for i in range((length + 1) // 2):
        j = length - i - 1
        weights.append(b**i if i == j else b**i + b**j)
    return weights


def _iter_length(b: int, length: int) -> Iterator[int]:
    # The outermost pair carries the leading digit; the innermost pair moves
    # fastest, which yields palindromes of one length in ascending order.
    weights = digit_weights(b, length)
    half = len(weights)
    digits = [0] * half
    digits[0] = 1
    value = weights[0]
    while True:
        yield value
        k = half - 1
        while k > 0 and digits[k] == b - 1:
            digits[k] = 0
            value -= (b - 1) * weights[k]
            k -= 1
        if k == 0 and digits[0] == b - 1:
            return
        digits[k] += 1
        value += weights[k]


class PalindromeStream:
    """Iterator over the palindromes n <= x admitted by ``cfg``, ascending."""

    def __init__(self, cfg: PalConfig, x: int, lengths: list[int] | None = None):
        self.cfg = cfg
        self.x = x
        if lengths is None:
            lengths = list(range(1, ilog(x, cfg.b) + 2)) if x >= 1 else []
        if cfg.filter is not Filter.ALL:
            # Even-length palindromes are multiples of b + 1, so the star set
            # never contains them either.
            lengths = [L for L in lengths if L % 2 == 1]
        self.lengths = lengths
        self._modulus = cfg.b**3 - cfg.b
        self._it = self._generate()

    def _generate(self) -> Iterator[int]:
        star = self.cfg.filter is Filter.STAR
        for length in self.lengths:
            for n in _iter_length(self.cfg.b, length):
                if n > self.x:
                    return
                if star and math.gcd(n, self._modulus) != 1:
                    continue
                yield n

    def __iter__(self) -> "PalindromeStream":
        return self

    def __next__(self) -> int:
        return next(self._it)


def enumerate_palindromes(cfg: PalConfig, x: int) -> PalindromeStream:
    """All palindromes n <= x in ascending order (``x < 1`` gives nothing)."""
    return PalindromeStream(cfg, x)


def enumerate_block(cfg: PalConfig, length: int, x: int) -> PalindromeStream:
    """The palindromes of exactly ``length`` digits that are <= x."""
    if length < 1:
        raise DomainError(f"digit length must be positive, got {length}")
    return PalindromeStream(cfg, x, lengths=[length])


def count_all(cfg: PalConfig, x: int) -> int:
    return sum(1 for _ in enumerate_palindromes(cfg, x))


def count_pi(b: int, N: int) -> int:
    """#Pi_b(2N): palindromes with exactly 2N + 1 digits."""
    if b < 2 or N < 0:
        raise DomainError(f"count_pi needs b >= 2 and N >= 0, got b={b}, N={N}")
    return (b - 1) * b**N


def gamma2(b: int) -> Fraction:
    """Parity correction: b/(b-1) for even b, 1 for odd b."""
    return Fraction(b, b - 1) if b % 2 == 0 else Fraction(1)


@dataclass(frozen=True)
class StarCount:
    exact: int
    main_term: float
    residual: float


def count_pi_star(b: int, N: int) -> StarCount:
    """Exact #Pi_b*(2N) against its main term gamma2(b)*phi(b^3-b)/(b^3-b)*#Pi_b(2N)."""
    from palinsieve.sieve import totient

    if b < 2 or N < 0:
        raise DomainError(f"count_pi_star needs b >= 2 and N >= 0, got b={b}, N={N}")
    cfg = PalConfig(b, Filter.STAR)
    length = 2 * N + 1
    exact = sum(1 for _ in PalindromeStream(cfg, b**length - 1, lengths=[length]))
    modulus = b**3 - b
    main = gamma2(b) * Fraction(totient(modulus), modulus) * count_pi(b, N)
    return StarCount(exact=exact, main_term=float(main), residual=float(exact - main))


def star_residual_bound(b: int) -> int:
    """C_STAR * b^2 * tau(b^2 - 1), the frozen bound on |residual|."""
    from palinsieve.sieve import divisor_count

    return C_STAR * b * b * divisor_count(b * b - 1)


def class_counts(cfg: PalConfig, x: int, q: int) -> list[int]:
    """Counts of admitted palindromes n <= x in each residue class mod q."""
    if q < 1:
        raise DomainError(f"modulus must be positive, got {q}")
    counts = [0] * q
    for n in enumerate_palindromes(cfg, x):
        counts[n % q] += 1
    return counts


def star_density_band(b: int, xs: list[int]) -> list[float]:
    """#P_b*(x)/sqrt(x) for each x, the scale on which the star set grows."""
    cfg = PalConfig(b, Filter.STAR)
    return [count_all(cfg, x) / math.sqrt(x) for x in xs]
