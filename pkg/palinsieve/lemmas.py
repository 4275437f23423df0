"""Discrepancy, the auxiliary inequalities, and the randomized check harness.

Each ``check_*`` returns a LemmaReport for one instance. Explicit checks
compare ``lhs <= rhs`` with a relative slack of 1e-9; ratio-form checks only
report ``lhs / rhs``. ``run_suite`` draws seeded random instances for every
lemma id and is what ``palinsieve lemmas`` runs.
"""

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from numpy.polynomial import Polynomial

from palinsieve.expsums import (
    ProductSpec,
    angle_from_shift,
    check_agm_product,
    check_decomposition,
    check_exponential_bound,
    check_pairing,
    check_phi_monotone,
    log_product,
)
from palinsieve.moments import check_spaced_moment, farey_points
from palinsieve.numeric import (
    ZERO_ANGLE,
    Angle,
    angle_from,
    angle_scale,
    circle_dist,
    e_angle,
    sum_deterministic,
)
from palinsieve.parallel import map_ordered
from palinsieve.report import LemmaReport, make_report
from palinsieve.sieve import is_probable_prime
from palinsieve.util import DomainError, PreconditionError, guard_memory

# Frozen bound on D_N / (1/H + sum_{h<=H} |mean e(h x)| / h).
ERDOS_TURAN_MAX = 4.0
# Frozen bound on log prod phi_b(a_n) / (b N D* log(2/D*)).
A_HAT_MAX = 1.0
# Added to the ergodic right-hand side.
ERGODIC_SLACK = 1e-6
CSC2_CLIP = 4.0


@dataclass(frozen=True)
class PointSet:
    """Finitely many reals in [0, 1)."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise DomainError("point set is empty")
        if any(not 0.0 <= v < 1.0 for v in self.values):
            raise DomainError("points must lie in [0, 1)")

    @classmethod
    def of(cls, values) -> "PointSet":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def sorted_array(self) -> np.ndarray:
        return np.sort(np.asarray(self.values, dtype=np.float64))


def star_discrepancy(ps: PointSet) -> float:
    """D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over order statistics."""
    x = ps.sorted_array()
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def discrepancy(ps: PointSet) -> float:
    """D_N = sup over 0 <= c <= d <= 1 of |#{c <= x < d}/N - (d - c)|.

    With F(t) = #{x < t}/N - t this is sup F - inf F. The supremum is
    approached just right of a point, the infimum is attained at a point.
    """
    x = ps.sorted_array()
    n = x.size
    i = np.arange(1, n + 1)
    high = max(0.0, float(np.max(i / n - x)))
    low = min(0.0, float(np.min((i - 1) / n - x)))
    return high - low


def discrepancy_bruteforce(ps: PointSet, grid: int) -> tuple[float, float]:
    """(D_N, D*_N) evaluated on t = k/grid, using both one-sided limits of F.

    Agrees with the order-statistic formulas when every point is a
    multiple of 1/grid.
    """
    x = ps.sorted_array()
    n = x.size
    t = np.arange(grid + 1) / grid
    left = np.searchsorted(x, t, side="left") / n - t
    right = np.searchsorted(x, t, side="right") / n - t
    values = np.concatenate((left, right[:-1]))
    return float(values.max() - values.min()), float(np.abs(values).max())


def _min_spacing(points: Sequence[Angle]) -> Fraction:
    return min(
        (circle_dist(a, c) for a, c in itertools.combinations(points, 2)),
        default=Fraction(1),
    )


def check_large_sieve(
    points: Sequence[Angle], coeffs: dict[int, complex], delta: Fraction
) -> LemmaReport:
    """sum_r |sum_n a_n e(a_r n)|^2 <= (1/delta + N - 1) sum_n |a_n|^2."""
    delta = Fraction(delta)
    if not coeffs:
        raise DomainError("large sieve needs at least one coefficient")
    if not 0 < delta <= 1:
        raise PreconditionError(f"spacing must lie in (0, 1], got {delta}")
    if _min_spacing(points) < delta:
        raise PreconditionError(f"points are not {delta}-spaced")
    ns = sorted(coeffs)
    length = ns[-1] - ns[0] + 1
    a = np.array([complex(coeffs[n]) for n in ns])
    sums = []
    for p in points:
        waves = np.array([e_angle(angle_scale(p, n)) for n in ns])
        sums.append(abs(complex(np.sum(a * waves))) ** 2)
    lhs = sum_deterministic(sums)
    rhs = (float(1 / delta) + length - 1) * sum_deterministic(np.abs(a) ** 2)
    instance = {"points": len(points), "delta": delta, "length": length}
    return make_report("large_sieve", instance, lhs, rhs)


@dataclass(frozen=True)
class TestFunction:
    """A function on [0, 1) of bounded variation with known integral."""

    kind: str
    d: float = 0.5

    __test__ = False

    @classmethod
    def parse(cls, f_id: str) -> "TestFunction":
        """``"indicator:d"``, ``"linear"`` or ``"tent"``."""
        name, _, arg = f_id.partition(":")
        if name == "indicator":
            d = float(arg) if arg else 0.5
            if not 0.0 <= d <= 1.0:
                raise DomainError(f"indicator endpoint must lie in [0, 1], got {d}")
            return cls("indicator", d)
        if name in ("linear", "tent"):
            return cls(name)
        raise DomainError(f"unknown test function {f_id!r}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "indicator":
            return (x < self.d).astype(np.float64)
        if self.kind == "linear":
            return x
        return np.abs(x - 0.5)

    @property
    def integral(self) -> float:
        return {"indicator": self.d, "linear": 0.5, "tent": 0.25}[self.kind]

    @property
    def variation(self) -> float:
        if self.kind == "indicator":
            return 1.0 if 0.0 < self.d < 1.0 else 0.0
        return 1.0


def check_koksma_hlawka(ps: PointSet, f_id: str) -> LemmaReport:
    """|mean f(x_n) - integral f| <= V(f) D*_N."""
    f = TestFunction.parse(f_id)
    x = np.asarray(ps.values, dtype=np.float64)
    lhs = abs(sum_deterministic(f(x)) / len(ps) - f.integral)
    rhs = f.variation * star_discrepancy(ps)
    return make_report("koksma_hlawka", {"N": len(ps), "f": f_id}, lhs, rhs)


def check_erdos_turan(ps: PointSet, H: int) -> LemmaReport:
    """D_N against 1/H + sum_{h<=H} |mean e(h x_n)| / h.

    Ratio form; ``passed`` compares the ratio with the empirical
    ERDOS_TURAN_MAX.
    """
    if H < 1:
        raise DomainError(f"H must be positive, got {H}")
    x = np.asarray(ps.values, dtype=np.float64)
    terms = [
        abs(complex(np.mean(np.exp(2j * np.pi * h * x)))) / h for h in range(1, H + 1)
    ]
    rhs = 1 / H + sum_deterministic(terms)
    instance = {"N": len(ps), "H": H, "threshold": ERDOS_TURAN_MAX}
    report = make_report("erdos_turan", instance, discrepancy(ps), rhs, explicit=False)
    report.passed = bool(report.ratio <= ERDOS_TURAN_MAX)
    return report


def _csc2(x: float) -> float:
    s = math.sin(x)
    return math.inf if s == 0.0 else 1.0 / (s * s)


def check_vinogradov(A: float, B: float, theta: float, q: int) -> LemmaReport:
    """sum_{n mod q} min(A, B csc^2(pi(n+theta)/q)) against the Vinogradov bound.

    rhs = min(A, B csc^2(pi ||theta|| / q)) + (1 - 4/pi^2) B q^2.
    """
    if A <= 0 or B <= 0 or q < 1:
        raise DomainError("need A > 0, B > 0 and q >= 1")
    terms = [min(A, B * _csc2(math.pi * (n + theta) / q)) for n in range(q)]
    lhs = sum_deterministic(terms)
    dist = abs(theta - round(theta))
    rhs = min(A, B * _csc2(math.pi * dist / q)) + (1 - 4 / math.pi**2) * B * q * q
    instance = {"A": A, "B": B, "theta": theta, "q": q}
    return make_report("vinogradov", instance, lhs, rhs)


def _periodic_values(f_id: str, b: int) -> Callable[[np.ndarray, int], np.ndarray]:
    """f evaluated at the exact rationals r/den (r an int64 array)."""

    def phi_over_b(r: np.ndarray, den: int) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            top = np.sin(np.pi * (b * r % den) / den)
            bottom = np.sin(np.pi * r / den)
            return np.where(r == 0, 1.0, np.abs(top / bottom) / b)

    def csc2_clip(r: np.ndarray, den: int) -> np.ndarray:
        with np.errstate(divide="ignore"):
            s = np.sin(np.pi * r / den)
            return np.minimum(CSC2_CLIP, 1.0 / (s * s))

    def const(r: np.ndarray, den: int) -> np.ndarray:
        return np.ones(r.shape)

    table = {"phi_over_b": phi_over_b, "csc2_clip": csc2_clip, "const": const}
    if f_id not in table:
        raise DomainError(f"unknown periodic function {f_id!r}")
    return table[f_id]


def check_ergodic_integral(f_id: str, N: int, b: int, grid: int) -> LemmaReport:
    """integral of prod_{0<=n<N} f(a b^n) <= (sup_t mean_{h<b} f((h+t)/b))^N + 1e-6.

    The integral is a midpoint rule on G = grid * b^N points; the supremum
    runs over the midpoints of the grids G/b^k, k = 1..N. On these grids the
    discrete integral obeys the same bound exactly.
    """
    if N < 1 or b < 2 or grid < 1:
        raise DomainError("need N >= 1, b >= 2, grid >= 1")
    f = _periodic_values(f_id, b)
    G = grid * b**N
    guard_memory(40 * G, "ergodic quadrature grid")
    den = 2 * G
    odd = 2 * np.arange(G, dtype=np.int64) + 1
    product = np.ones(G)
    for n in range(N):
        product *= f(odd * (b**n % den) % den, den)
    lhs = sum_deterministic(product) / G
    best = 0.0
    for k in range(1, N + 1):
        Gk = G // b**k
        mid = 2 * np.arange(Gk, dtype=np.int64) + 1
        avg = sum(f(mid + 2 * h * Gk, 2 * Gk * b) for h in range(b)) / b
        best = max(best, float(np.max(avg)))
    rhs = best**N + ERGODIC_SLACK
    instance = {"f": f_id, "N": N, "b": b, "grid": grid}
    return make_report("ergodic_integral", instance, lhs, rhs)


def check_weyl_product(ps: PointSet, b: int) -> LemmaReport:
    """log prod phi_b(x_n) against b N D* log(2/D*).

    Ratio form; the ratio is recorded as ``a_hat`` and ``passed`` compares it
    with the empirical A_HAT_MAX.
    """
    x = np.asarray(ps.values, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(
            x == 0.0, float(b), np.abs(np.sin(np.pi * b * x) / np.sin(np.pi * x))
        )
        logs = np.log(values)
    log_p = -math.inf if np.any(np.isneginf(logs)) else sum_deterministic(logs)
    d_star = star_discrepancy(ps)
    scale = b * len(ps) * d_star * math.log(2 / d_star)
    instance = {"N": len(ps), "b": b, "threshold": A_HAT_MAX}
    report = make_report("weyl_product", instance, log_p, scale, explicit=False)
    report.instance["a_hat"] = report.ratio
    report.passed = bool(report.ratio <= A_HAT_MAX)
    return report


def _bump_derivative_poly(k: int) -> Polynomial:
    """p_k with g^(k)(u) = p_k(u) (1-u^2)^(-2k) exp(-1/(1-u^2))."""
    u = Polynomial([0.0, 1.0])
    w = 1 - u**2
    p = Polynomial([1.0])
    for j in range(k):
        p = p.deriv() * w**2 - 2 * u * p + 4 * j * u * w * p
    return p


def bump_norm(k: int, scale: float) -> float:
    """||f^(k)||_1 for f(x) = exp(-1/(1-(x/scale)^2)) on |x| < scale."""
    p = _bump_derivative_poly(k)
    coeffs = list(reversed(p.coef.tolist()))
    cuts = sorted(
        {float(r.real) for r in p.roots() if abs(r.imag) < 1e-12 and -1 < r.real < 1}
    )

    def integrand(u):
        w = 1 - u * u
        if w <= 0:
            return mpmath.mpf(0)
        weight = mpmath.exp(-1 / w - 2 * k * mpmath.log(w))
        return abs(mpmath.polyval(coeffs, u)) * weight

    with mpmath.workdps(30):
        total = mpmath.quad(integrand, [-1.0, *cuts, 1.0])
    return float(total) * scale ** (1 - k)


def check_smooth_sum(k: int, alpha: Angle, scale: float) -> LemmaReport:
    """|sum_n f(n) e(alpha n)| for the bump of half-width ``scale``.

    The bound is ||f||_1 + ||f'||_1 / 2 for k = 0 and
    ||f^(k)||_1 / |2 sin(pi alpha)|^k for k >= 1. At alpha = 0 only the
    first form applies, whatever k is.
    """
    if k < 0 or scale <= 0:
        raise DomainError("need k >= 0 and a positive mollifier scale")
    n = np.arange(-math.ceil(scale) + 1, math.ceil(scale), dtype=np.int64)
    u = n / scale
    inside = np.abs(u) < 1
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(inside, np.exp(-1 / np.where(inside, 1 - u * u, 1.0)), 0.0)
    phases = np.array([int(m) * alpha.num % alpha.den / alpha.den for m in n])
    lhs = abs(complex(np.sum(f * np.exp(2j * np.pi * phases))))
    form = 0 if alpha.num == 0 else k
    if form == 0:
        rhs = bump_norm(0, scale) + bump_norm(1, scale) / 2
    else:
        s = abs(2 * math.sin(math.pi * float(alpha)))
        rhs = bump_norm(k, scale) / s**k
    instance = {"k": k, "form": form, "alpha": alpha, "scale": scale}
    return make_report("smooth_sum", instance, lhs, rhs)


def check_l2_bound(
    b: int, N: int, L: int, M: int, Q: int, beta: Angle = ZERO_ANGLE
) -> LemmaReport:
    """sum_{q<=Q} sum_{h mod q} prod_{L<n<=M} phi_b^2 against (Q + b^(M-L)) Q b^(M-L).

    Ratio form: the bound holds up to a factor b^(eps N), so no verdict.
    """
    if not 0 <= L < M <= 2 * N or Q < 1:
        raise DomainError(f"need 0 <= L < M <= 2N and Q >= 1, got L={L}, M={M}, N={N}")
    spec = ProductSpec(b, N, L + 1, M, beta)
    values = []
    for q in range(1, Q + 1):
        for h in range(q):
            lv = log_product(spec, angle_from(h, q))
            values.append(0.0 if lv.is_zero else math.exp(2 * lv.log))
    lhs = sum_deterministic(values)
    span = b ** (M - L)
    rhs = float((Q + span) * Q * span)
    instance = {"b": b, "N": N, "L": L, "M": M, "Q": Q, "beta": beta}
    return make_report("l2_bound", instance, lhs, rhs, explicit=False)


def _random_angle(rng: np.random.Generator, max_den: int) -> Angle:
    den = int(rng.integers(1, max_den + 1))
    return angle_from(int(rng.integers(0, den)), den)


def _random_points(rng: np.random.Generator) -> PointSet:
    n = int(rng.integers(1, 201))
    if rng.random() < 0.5:
        return PointSet.of(rng.random(n))
    return PointSet.of(rng.random(n) * 0.05)


def _prime_factors_above(q: int, b: int) -> bool:
    p = 2
    while p * p <= q:
        if q % p == 0:
            if p <= b:
                return False
            while q % p == 0:
                q //= p
        p += 1
    return q == 1 or q > b


def _draw(lemma_id: str, rng: np.random.Generator) -> LemmaReport:
    if lemma_id == "large_sieve":
        Q = int(rng.integers(1, 9))
        length = int(rng.integers(1, 65))
        size = int(rng.integers(1, length + 1))
        coeffs = {
            int(n): complex(rng.normal(), rng.normal())
            for n in rng.choice(length, size=size, replace=False)
        }
        return check_large_sieve(farey_points(Q), coeffs, Fraction(1, Q * Q))
    if lemma_id == "koksma_hlawka":
        f_id = ["indicator", "linear", "tent"][int(rng.integers(0, 3))]
        if f_id == "indicator":
            f_id += f":{int(rng.integers(0, 1001)) / 1000}"
        return check_koksma_hlawka(_random_points(rng), f_id)
    if lemma_id == "erdos_turan":
        return check_erdos_turan(_random_points(rng), int(rng.integers(1, 33)))
    if lemma_id == "vinogradov":
        return check_vinogradov(
            float(rng.uniform(0.1, 100)),
            float(rng.uniform(0.01, 10)),
            float(rng.uniform(-5, 5)),
            int(rng.integers(1, 61)),
        )
    if lemma_id == "ergodic_integral":
        f_id = ["phi_over_b", "csc2_clip", "const"][int(rng.integers(0, 3))]
        return check_ergodic_integral(
            f_id, int(rng.integers(1, 4)), int(rng.integers(2, 5)), 64
        )
    if lemma_id == "weyl_product":
        return check_weyl_product(_random_points(rng), int(rng.integers(2, 11)))
    if lemma_id == "smooth_sum":
        return check_smooth_sum(
            int(rng.integers(0, 5)),
            _random_angle(rng, 1000),
            float(rng.uniform(0.5, 20)),
        )
    if lemma_id == "pairing":
        return check_pairing(
            int(rng.integers(2, 11)),
            _random_angle(rng, 10**4),
            int(rng.integers(0, 9)),
            int(rng.integers(0, 9)),
        )
    if lemma_id == "exponential_bound":
        b = int(rng.integers(2, 11))
        den = int(rng.integers(b, 10**4))
        num = int(rng.integers(0, den // b + 1))
        if rng.random() < 0.5:
            num = -num
        return check_exponential_bound(b, angle_from(num, den))
    if lemma_id == "phi_monotone":
        b = int(rng.integers(2, 11))
        den = 3 * b * int(rng.integers(1, 200))
        delta = angle_from(int(rng.integers(0, 2 * den // (3 * b) + 1)), den)
        low = delta.as_fraction()
        t = low + (Fraction(1, 2) - low) * Fraction(int(rng.integers(0, 1001)), 1000)
        sign = 1 if rng.random() < 0.5 else -1
        a = angle_from(sign * t.numerator, t.denominator)
        return check_phi_monotone(b, a, delta)
    if lemma_id == "agm_product":
        b = int(rng.integers(2, 6))
        candidates = (int(v) for v in rng.integers(b + 1, 400, size=64))
        q = next(
            (q for q in candidates if _prime_factors_above(q, b)),
            next(p for p in itertools.count(b + 1) if is_probable_prime(p)),
        )
        units = (int(v) for v in rng.integers(1, q, size=64))
        h = next((h for h in units if math.gcd(h, q) == 1), 1)
        N = int(rng.integers(1, 7))
        return check_agm_product(b, q, h, int(rng.integers(1, 2 * N + 1)), N)
    if lemma_id == "decomposition":
        return check_decomposition(
            int(rng.integers(2, 6)),
            int(rng.integers(1, 10**4)),
            _random_angle(rng, 1000),
        )
    if lemma_id == "spaced_moment":
        Q = int(rng.integers(2, 7))
        return check_spaced_moment(
            int(rng.integers(2, 4)),
            int(rng.integers(2, 4)),
            int(rng.integers(1, 3)),
            farey_points(Q),
            Fraction(1, Q * Q),
        )
    if lemma_id == "l2_bound":
        b = int(rng.integers(2, 4))
        N = int(rng.integers(3, 6))
        L = int(rng.integers(0, N))
        M = int(rng.integers(L + 1, min(2 * N, L + 4) + 1))
        beta = angle_from_shift(b, int(rng.integers(0, b**3 - b)))
        return check_l2_bound(b, N, L, M, int(rng.integers(2, 11)), beta)
    raise DomainError(f"unknown lemma id {lemma_id!r}")


LEMMA_IDS = (
    "large_sieve",
    "koksma_hlawka",
    "erdos_turan",
    "vinogradov",
    "ergodic_integral",
    "weyl_product",
    "smooth_sum",
    "pairing",
    "exponential_bound",
    "phi_monotone",
    "agm_product",
    "decomposition",
    "spaced_moment",
    "l2_bound",
)


def _run_lemma(task: tuple[str, np.random.SeedSequence, int]) -> list[LemmaReport]:
    lemma_id, seq, instances = task
    rng = np.random.default_rng(seq)
    return [_draw(lemma_id, rng) for _ in range(instances)]


def run_suite(
    seed: int, instances: int, only: Sequence[str] | None = None, workers: int = 1
) -> list[LemmaReport]:
    """Seeded random instances of every lemma (or those in ``only``).

    Each lemma id draws from its own child of ``SeedSequence(seed)``, so
    the reports for one id do not depend on which other ids run.
    """
    ids = list(only) if only else list(LEMMA_IDS)
    unknown = [i for i in ids if i not in LEMMA_IDS]
    if unknown:
        raise DomainError(f"unknown lemma ids: {', '.join(unknown)}")
    children = dict(zip(LEMMA_IDS, np.random.SeedSequence(seed).spawn(len(LEMMA_IDS))))
    tasks = [(i, children[i], instances) for i in ids]
    return [r for part in map_ordered(_run_lemma, tasks, workers) for r in part]
