"""Exact angles mod 1, log-space products, and deterministic summation.

Every frequency in the package is an ``Angle``: a reduced fraction in [0, 1)
carried exactly, so that multiplying by huge integers such as b^n + b^(2N-n)
never loses precision. Floats appear only when a sine or an exponential is
finally evaluated.
"""

import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from palinsieve.util import DomainError, InvalidDenominatorError, NumericError


@dataclass(frozen=True)
class Angle:
    """A rational angle num/den mod 1 with 0 <= num < den and gcd(num, den) = 1."""

    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise InvalidDenominatorError(f"nonpositive angle denominator {self.den}")
        if not 0 <= self.num < self.den or math.gcd(self.num, self.den) != 1:
            raise DomainError(f"angle {self.num}/{self.den} is not reduced into [0, 1)")

    def __float__(self) -> float:
        return self.num / self.den

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


ZERO_ANGLE = Angle(0, 1)


def angle_from(num: int, den: int) -> Angle:
    """Reduce num/den into [0, 1) in lowest terms."""
    if den == 0:
        raise InvalidDenominatorError("angle denominator is zero")
    if den < 0:
        num, den = -num, -den
    num %= den
    g = math.gcd(num, den)
    return Angle(num // g, den // g)


def parse_angle(text: str) -> Angle:
    """Parse ``"p/q"`` or an integer string into an Angle."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"cannot parse angle {text!r}: {e}") from None
    return angle_from(value.numerator, value.denominator)


def angle_scale(a: Angle, m: int) -> Angle:
    """Return m*a mod 1. The multiplier is reduced mod den before multiplying."""
    return angle_from((m % a.den) * a.num, a.den)


def mirror_scale(a: Angle, b: int, n: int, N: int) -> Angle:
    """Return a*(b^n + b^(2N-n)) mod 1 without materializing b^(2N-n)."""
    m = (pow(b, n, a.den) + pow(b, 2 * N - n, a.den)) % a.den
    return angle_from(m * a.num, a.den)


def angle_add(a: Angle, c: Angle) -> Angle:
    return angle_from(a.num * c.den + c.num * a.den, a.den * c.den)


def circle_dist(a: Angle, c: Angle) -> Fraction:
    """Circle distance ||a - c|| in [0, 1/2], exact."""
    d = (a.as_fraction() - c.as_fraction()) % 1
    return min(d, 1 - d)


def norm(a: Angle) -> Fraction:
    """Distance to the nearest integer, ||a||, exact."""
    return Fraction(min(a.num, a.den - a.num), a.den)


def angle_dist(a: Angle) -> float:
    """||a|| as a float."""
    return float(norm(a))


def e_angle(a: Angle) -> complex:
    """e(a) = exp(2 pi i a), evaluated from the exact residue."""
    t = 2.0 * math.pi * a.num / a.den
    return complex(math.cos(t), math.sin(t))


def check_real(x: float, what: str = "value") -> float:
    if math.isnan(x):
        raise NumericError(f"{what} is NaN")
    return x


@dataclass(frozen=True, order=True)
class LogValue:
    """log of a non-negative product; ``log == -inf`` is the ZERO sentinel."""

    log: float

    @property
    def is_zero(self) -> bool:
        return self.log == -math.inf

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.is_zero or other.is_zero:
            return ZERO
        return LogValue(self.log + other.log)

    def __pow__(self, k: int) -> "LogValue":
        if k == 0:
            return ONE
        if self.is_zero:
            return ZERO
        return LogValue(self.log * k)

    def exp(self) -> float:
        """The product as a float; ``inf`` when it overflows a double."""
        if self.is_zero:
            return 0.0
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    def mpf(self) -> mpmath.mpf:
        """The product as an extended-range mpmath real."""
        if self.is_zero:
            return mpmath.mpf(0)
        return mpmath.exp(mpmath.mpf(self.log))


ZERO = LogValue(-math.inf)
ONE = LogValue(0.0)


def sum_deterministic(xs: Iterable[float]) -> float:
    """Pairwise float64 sum whose result depends only on the order of ``xs``.

    Callers that split work across processes must concatenate partial
    results in a fixed order before summing, never add partial sums.
    """
    arr = np.fromiter(xs, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    total = float(np.add.reduce(arr))
    return check_real(total, "sum")


def iroot(x: int, k: int) -> int:
    """Largest integer z with z**k <= x."""
    if x < 0 or k < 1:
        raise DomainError(f"iroot needs x >= 0 and k >= 1, got x={x}, k={k}")
    if x < 2 or k == 1:
        return x
    r = 1 << -(-x.bit_length() // k)
    while True:
        y = ((k - 1) * r + x // r ** (k - 1)) // k
        if y >= r:
            break
        r = y
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def ilog(x: int, b: int) -> int:
    """Largest L >= 0 with b**L <= x (x >= 1)."""
    if x < 1 or b < 2:
        raise DomainError(f"ilog needs x >= 1 and b >= 2, got x={x}, b={b}")
    L, power = 0, b
    while power <= x:
        L += 1
        power *= b
    return L


def multiplicative_order(b: int, q: int) -> int:
    """ord_q(b), the least t >= 1 with b^t = 1 mod q."""
    if q < 1:
        raise DomainError(f"modulus must be positive: {q}")
    if math.gcd(b, q) != 1:
        raise DomainError(f"{b} is not invertible modulo {q}")
    if q == 1:
        return 1
    t, power = 1, b % q
    while power != 1:
        power = power * b % q
        t += 1
    return t
