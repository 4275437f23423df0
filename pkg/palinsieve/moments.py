"""Composition counts, the coefficient vector of Phi_N^{2K}, and its moments.

Phi_N(a)^{2K} = |sum_l a_l e(a l)|^2 where a_l counts the ways to write l as
sum_{1<=m<N} v_m (b^m + b^(2N-m)) weighted by r(v_m; K, b), the number of
K-tuples of base-b digits summing to v_m. Parseval turns the 2K-th moment
into sum_l a_l^2, which is computed exactly here and compared against
quadrature and against sums over Farey fractions.
"""

import functools
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from palinsieve.expsums import log_product, phi_product_spec
from palinsieve.numeric import ZERO_ANGLE, Angle, circle_dist, sum_deterministic
from palinsieve.report import LemmaReport, make_report
from palinsieve.util import (
    DomainError,
    PreconditionError,
    guard_memory,
    guard_size,
)

# Frozen bound on max_n |r(n;K,b)/b^K - r_gauss(n;K,b)| * b * K^(3/2)
# over b in {2, 3, 5, 10} and 4 <= K <= 128; the sweep peaks near 0.4 (b = 2).
C_COMP = 1.0
# Frozen constant c in the Farey moment bound for b <= 3, N <= 4, K <= 3.
FAREY_C = 2.0

_DENSE_LIMIT = 10**6


@dataclass(frozen=True)
class CompositionTable:
    """r(n; K, b) for 0 <= n <= (b-1)K."""

    b: int
    K: int
    values: tuple[int, ...]

    def r(self, n: int) -> int:
        if 0 <= n < len(self.values):
            return self.values[n]
        return 0


@functools.lru_cache(maxsize=256)
def composition_table(K: int, b: int) -> CompositionTable:
    """Coefficients of (1 + z + ... + z^(b-1))^K by repeated window sums."""
    if K < 1 or b < 2:
        raise DomainError(f"composition counts need K >= 1 and b >= 2, got {K}, {b}")
    row = [1] * b
    for _ in range(K - 1):
        prefix = [0, *itertools.accumulate(row)]
        width = len(row) + b - 1
        row = [
            prefix[min(n + 1, len(row))] - prefix[max(n + 1 - b, 0)]
            for n in range(width)
        ]
    return CompositionTable(b=b, K=K, values=tuple(row))


def r_exact(n: int, K: int, b: int) -> int:
    """Number of K-tuples of base-b digits summing to n (0 outside the range)."""
    return composition_table(K, b).r(n)


def r_inclusion_exclusion(n: int, K: int, b: int) -> int:
    """sum_j (-1)^j C(K, j) C(n - jb + K - 1, K - 1), an independent oracle."""
    if n < 0 or n > (b - 1) * K:
        return 0
    total = 0
    for j in range(min(K, n // b) + 1):
        total += (-1) ** j * math.comb(K, j) * math.comb(n - j * b + K - 1, K - 1)
    return total


def r_gauss(n: int, K: int, b: int) -> float:
    """Local Gaussian approximation to r(n; K, b) / b^K."""
    var = (b * b - 1) * K
    center = (b - 1) * K / 2
    return math.sqrt(6 / (math.pi * var)) * math.exp(-6 / var * (n - center) ** 2)


def composition_error(b: int, K: int) -> float:
    """max_n |r(n;K,b)/b^K - r_gauss(n;K,b)| * b * K^(3/2)."""
    table = composition_table(K, b)
    scale = b**K
    worst = max(abs(v / scale - r_gauss(n, K, b)) for n, v in enumerate(table.values))
    return worst * b * K**1.5


@dataclass(frozen=True)
class CoeffVector:
    """Sparse a_l, keyed by position l."""

    b: int
    N: int
    K: int
    coeffs: dict[int, int]

    @property
    def support_max(self) -> int:
        return max(self.coeffs) if self.coeffs else 0


def _positions(b: int, N: int) -> list[int]:
    return [b**m + b ** (2 * N - m) for m in range(1, N)]


def coeff_vector(b: int, N: int, K: int) -> CoeffVector:
    """a_l with |sum_l a_l e(l a)| = Phi_N(a)^K, built as a sparse convolution.

    Dense object arrays are used only when K b^(2N) <= 10^6 and the sparse
    support would not be much smaller.
    """
    if b < 2 or N < 0 or K < 1:
        raise DomainError(f"coeff_vector needs b >= 2, N >= 0, K >= 1: {b}, {N}, {K}")
    size = K * b ** (2 * N)
    guard_size(size, "max_coeff_size", "coefficient size K*b^(2N)")
    table = composition_table(K, b).values
    positions = _positions(b, N)
    sparse_estimate = math.prod(len(table) for _ in positions)
    if positions and size <= _DENSE_LIMIT and sparse_estimate * 8 > size:
        coeffs = _dense_convolve(table, positions, size)
    else:
        coeffs = _sparse_convolve(table, positions)
    return CoeffVector(b=b, N=N, K=K, coeffs=coeffs)


def _sparse_convolve(table: tuple[int, ...], positions: list[int]) -> dict[int, int]:
    current = {0: 1}
    for p in positions:
        nxt: dict[int, int] = defaultdict(int)
        for ell, c in current.items():
            for v, rv in enumerate(table):
                nxt[ell + v * p] += c * rv
        current = dict(nxt)
    return dict(sorted(current.items()))


def _dense_convolve(
    table: tuple[int, ...], positions: list[int], size: int
) -> dict[int, int]:
    guard_memory(64 * (size + 1), "dense coefficient array")
    current = np.zeros(1, dtype=object)
    current[0] = 1
    for p in positions:
        nxt = np.zeros(len(current) + (len(table) - 1) * p, dtype=object)
        for v, rv in enumerate(table):
            nxt[v * p : v * p + len(current)] += current * rv
        current = nxt
    idx = np.flatnonzero(current != 0)
    return {int(i): int(current[i]) for i in idx}


def moment_exact(b: int, N: int, K: int) -> int:
    """sum_l a_l^2 = integral of Phi_N^{2K} over [0, 1)."""
    return sum(c * c for c in coeff_vector(b, N, K).coeffs.values())


def _log_big_phi_grid(b: int, N: int, grid: int) -> np.ndarray:
    """log Phi_N(j / grid) for j = 0..grid-1 (-inf where a factor vanishes)."""
    j = np.arange(grid, dtype=np.int64)
    total = np.zeros(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        for p in _positions(b, N):
            r = j * (p % grid) % grid
            top = np.sin(np.pi * (b * r % grid) / grid)
            bottom = np.sin(np.pi * r / grid)
            values = np.where(r == 0, float(b), np.abs(top / bottom))
            total += np.log(values)
    return total


def moment_quadrature(b: int, N: int, K: int, grid: int) -> mpmath.mpf:
    """Mean of Phi_N^{2K} over the uniform grid j/grid.

    Exact up to rounding once grid > K b^(2N), since Phi_N^{2K} is a
    trigonometric polynomial of that degree; the grid must be at least
    4 K b^(2N).
    """
    if b < 2 or N < 0 or K < 1:
        raise DomainError("moment_quadrature needs b >= 2, N >= 0, K >= 1")
    need = 4 * K * b ** (2 * N)
    if grid < need:
        raise PreconditionError(f"grid {grid} is below 4*K*b^(2N) = {need}")
    guard_size(grid, "max_grid", "quadrature grid")
    guard_memory(48 * grid, "quadrature grid")
    if N <= 1:
        return mpmath.mpf(1)
    logs = _log_big_phi_grid(b, N, grid)
    peak = float(np.max(logs))
    scaled = np.exp(2 * K * (logs - peak))
    mean = sum_deterministic(scaled) / grid
    return mpmath.exp(mpmath.mpf(2 * K * peak)) * mean


def farey_points(Q: int) -> list[Angle]:
    """h/q in lowest terms for 1 <= q <= Q, 0 <= h < q (just 0/1 for q = 1)."""
    if Q < 1:
        raise DomainError(f"Farey order must be positive, got {Q}")
    return [
        Angle(h, q) for q in range(1, Q + 1) for h in range(q) if math.gcd(h, q) == 1
    ]


def _sum_powered(logs: list[float], power: int) -> mpmath.mpf:
    finite = [v for v in logs if v != -math.inf]
    if not finite:
        return mpmath.mpf(0)
    peak = max(finite)
    scaled = sum_deterministic(math.exp(power * (v - peak)) for v in finite)
    return mpmath.exp(mpmath.mpf(power * peak)) * scaled


def farey_moment_sum(
    b: int, N: int, K: int, Q: int, beta: Angle = ZERO_ANGLE
) -> mpmath.mpf:
    """sum_{q<=Q} sum*_{h mod q} Phi_N(h/q + beta)^{2K}, in extended range."""
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    spec = phi_product_spec(b, N, beta)
    logs = [log_product(spec, a).log for a in farey_points(Q)]
    return _sum_powered(logs, 2 * K)


def farey_bound(b: int, N: int, K: int, Q: int, c: float = FAREY_C) -> mpmath.mpf:
    """(Q^2 + K b^(2N)) b^(2(K-1)N+2) (1 + c/sqrt(K) + c b^2/K)^(2N)."""
    head = mpmath.mpf(Q * Q + K * b ** (2 * N)) * mpmath.mpf(b) ** (2 * (K - 1) * N + 2)
    return head * (1 + c / math.sqrt(K) + c * b * b / K) ** (2 * N)


def moment_ratio(b: int, N: int, K: int, moment: int | None = None) -> float:
    """rho = (moment / b^(2(K-1)N+2))^(1/(2N)) - 1.

    ``moment`` defaults to moment_exact(b, N, K).
    """
    if N < 1:
        raise DomainError(f"moment_ratio needs N >= 1, got {N}")
    if moment is None:
        moment = moment_exact(b, N, K)
    base = mpmath.mpf(moment) / mpmath.mpf(b) ** (2 * (K - 1) * N + 2)
    return float(base ** (mpmath.mpf(1) / (2 * N)) - 1)


def check_spaced_moment(
    b: int, N: int, K: int, points: list[Angle], delta: Fraction
) -> LemmaReport:
    """sum_r Phi_N^{2K}(a_r) <= (1/delta + K b^(2N)) sum_l a_l^2, a_r delta-spaced."""
    delta = Fraction(delta)
    if not 0 < delta <= Fraction(1, 2):
        raise PreconditionError(f"spacing must lie in (0, 1/2], got {delta}")
    for a, c in itertools.combinations(points, 2):
        if circle_dist(a, c) < delta:
            raise PreconditionError(f"points {a} and {c} are closer than {delta}")
    spec = phi_product_spec(b, N)
    lhs = _sum_powered([log_product(spec, a).log for a in points], 2 * K)
    moment = moment_exact(b, N, K)
    rhs = (mpmath.mpf(delta.denominator) / delta.numerator + K * b ** (2 * N)) * moment
    instance = {"b": b, "N": N, "K": K, "points": len(points), "delta": delta}
    return make_report("spaced_moment", instance, lhs, rhs)


@dataclass(frozen=True)
class AverageSum:
    total: float
    trivial: float
    ratio: float


def average_sum(b: int, N: int, Q: int, beta: Angle = ZERO_ANGLE) -> AverageSum:
    """sum_{q<=Q, (q,b)=1} sum*_h Phi_N(h/q + beta) against (#fractions) b^(N-1)."""
    spec = phi_product_spec(b, N, beta)
    points = [a for a in farey_points(Q) if math.gcd(a.den, b) == 1]
    total = sum_deterministic(log_product(spec, a).exp() for a in points)
    trivial = len(points) * float(b) ** max(N - 1, 0)
    ratio = total / trivial if trivial else 0.0
    return AverageSum(total=total, trivial=trivial, ratio=ratio)

