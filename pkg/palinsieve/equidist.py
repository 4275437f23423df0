"""Equidistribution of the star palindromes in residue classes.

For a modulus q the error is the largest deviation |#{n in P*(y): n = a mod q}
- #P*(y)/q| over every class a and every cut-off y <= x. Counts only change
when a palindrome is inserted, so the supremum over y is a maximum over the
states reached after each insertion (the state before an insertion is the
state after the previous one).
"""

import math
from dataclasses import dataclass

import numpy as np

from palinsieve.numeric import sum_deterministic
from palinsieve.palindromes import Filter, PalConfig, count_all, enumerate_palindromes
from palinsieve.parallel import map_ordered
from palinsieve.util import DomainError, FitError, PreconditionError

# Moduli above this use the count-histogram tracker instead of a full rescan.
SCAN_LIMIT = 1000


class ScanTracker:
    """Class counts mod q; the deviation is recomputed over all q classes."""

    def __init__(self, q: int):
        self.q = q
        self.counts = [0] * q
        self.total = 0

    def add(self, residue: int) -> None:
        self.counts[residue] += 1
        self.total += 1

    def deviation(self) -> float:
        q, t = self.q, self.total
        return max(abs(c * q - t) for c in self.counts) / q


class HistogramTracker:
    """Class counts mod q with O(1) access to the largest and smallest count.

    ``hist[c]`` is the number of classes holding exactly c elements.
    """

    def __init__(self, q: int):
        self.q = q
        self.counts = [0] * q
        self.hist = {0: q}
        self.low = 0
        self.high = 0
        self.total = 0

    def add(self, residue: int) -> None:
        c = self.counts[residue]
        self.hist[c] -= 1
        if not self.hist[c]:
            del self.hist[c]
            if c == self.low:
                self.low = c + 1
        self.counts[residue] = c + 1
        self.hist[c + 1] = self.hist.get(c + 1, 0) + 1
        self.high = max(self.high, c + 1)
        self.total += 1

    def deviation(self) -> float:
        q, t = self.q, self.total
        return max(self.high * q - t, t - self.low * q) / q


def _tracker(q: int, method: str):
    if method == "scan" or (method == "auto" and q <= SCAN_LIMIT):
        return ScanTracker(q)
    if method in ("histogram", "auto"):
        return HistogramTracker(q)
    raise DomainError(f"unknown tracking method {method!r}")


@dataclass(frozen=True)
class ErrorRow:
    q: int
    error: float


@dataclass(frozen=True)
class ErrorTable:
    b: int
    x: int
    rows: tuple[ErrorRow, ...]

    def total(self) -> float:
        return sum_deterministic(row.error for row in self.rows)


def _errors_for_moduli(task: tuple[int, int, tuple[int, ...], str]) -> list[ErrorRow]:
    b, x, moduli, method = task
    trackers = [_tracker(q, method) for q in moduli]
    worst = [0.0] * len(moduli)
    for n in enumerate_palindromes(PalConfig(b, Filter.STAR), x):
        for i, tr in enumerate(trackers):
            tr.add(n % tr.q)
            dev = tr.deviation()
            if dev > worst[i]:
                worst[i] = dev
    return [ErrorRow(q=q, error=e) for q, e in zip(moduli, worst)]


def equidist_error(b: int, x: int, q: int, method: str = "auto") -> float:
    """sup_{y<=x} max_a |#P*(y, a, q) - #P*(y)/q|."""
    if q < 1:
        raise DomainError(f"modulus must be positive, got {q}")
    return _errors_for_moduli((b, x, (q,), method))[0].error


def error_table(
    b: int, x: int, moduli: list[int], workers: int = 1, method: str = "auto"
) -> ErrorTable:
    """Errors for every modulus; moduli are dealt round-robin to the workers."""
    if any(q < 1 for q in moduli):
        raise DomainError("moduli must be positive")
    moduli = sorted(set(moduli))
    n_parts = max(1, min(workers, len(moduli)))
    tasks = [(b, x, tuple(moduli[i::n_parts]), method) for i in range(n_parts)]
    parts = map_ordered(_errors_for_moduli, tasks, workers)
    rows = [row for part in parts for row in part]
    return ErrorTable(b=b, x=x, rows=tuple(sorted(rows, key=lambda r: r.q)))


def admissible_moduli(b: int, Q: int) -> list[int]:
    """q <= Q with gcd(q, b^3 - b) = 1."""
    modulus = b**3 - b
    return [q for q in range(1, Q + 1) if math.gcd(q, modulus) == 1]


def level(x: int, theta: float, eps: float) -> int:
    """Q = floor(x^(theta - eps))."""
    if x < 1:
        return 0
    return math.floor(math.exp((theta - eps) * math.log(x)) + 1e-9)


def _check_level(theta: float, eps: float) -> None:
    if not 0 < eps < theta:
        raise DomainError(f"need 0 < eps < theta, got theta={theta}, eps={eps}")


def aggregate_error(
    b: int, x: int, theta: float, eps: float, workers: int = 1
) -> float:
    """sum of equidist_error over admissible q <= x^(theta - eps)."""
    _check_level(theta, eps)
    moduli = admissible_moduli(b, level(x, theta, eps))
    if not moduli:
        return 0.0
    return error_table(b, x, moduli, workers=workers).total()


@dataclass(frozen=True)
class DecayPoint:
    x: int
    Q: int
    aggregate: float
    count: int
    normalized: float


def first_nontrivial_modulus(b: int) -> int:
    """Smallest q > 1 with gcd(q, b^3 - b) = 1."""
    modulus = b**3 - b
    q = 2
    while math.gcd(q, modulus) != 1:
        q += 1
    return q


def _decay_point(x: int, Q: int, errors: list[float], count: int) -> DecayPoint:
    agg = sum_deterministic(errors)
    return DecayPoint(
        x=x,
        Q=Q,
        aggregate=agg,
        count=count,
        normalized=agg / count if count else 0.0,
    )


def decay_series(
    b: int,
    xs: list[int],
    theta: float,
    eps: float,
    workers: int = 1,
    fixed_level: int | None = None,
) -> tuple[list[DecayPoint], list[DecayPoint]]:
    """Normalized aggregates along a sweep, at growing and at fixed level.

    The growing series sums over admissible q <= x^(theta - eps), as in
    ``aggregate_error``. The fixed series keeps the moduli up to
    ``fixed_level`` at every x; by default that is the level of the first
    sweep point, raised to the first admissible q > 1. Both come from one
    error table per x.
    """
    _check_level(theta, eps)
    if not xs:
        raise PreconditionError("decay_series needs at least one x")
    if fixed_level is not None and fixed_level < 1:
        raise DomainError(f"fixed level must be positive, got {fixed_level}")
    if fixed_level is None:
        fixed_level = max(level(xs[0], theta, eps), first_nontrivial_modulus(b))
    fixed = admissible_moduli(b, fixed_level)
    cfg = PalConfig(b, Filter.STAR)
    growing_pts, fixed_pts = [], []
    for x in xs:
        Q = level(x, theta, eps)
        moduli = admissible_moduli(b, Q)
        table = error_table(b, x, sorted(set(moduli) | set(fixed)), workers=workers)
        errors = {row.q: row.error for row in table.rows}
        count = count_all(cfg, x)
        growing_pts.append(_decay_point(x, Q, [errors[q] for q in moduli], count))
        fixed_pts.append(
            _decay_point(x, fixed_level, [errors[q] for q in fixed], count)
        )
    return growing_pts, fixed_pts


def decay_points(
    b: int,
    xs: list[int],
    theta: float,
    eps: float,
    workers: int = 1,
    fixed_level: int | None = None,
) -> list[DecayPoint]:
    """aggregate_error(x) / #P*(x) along a sweep of x.

    With ``fixed_level`` the moduli are those up to that level at every x.
    """
    _check_level(theta, eps)
    if fixed_level is not None and fixed_level < 1:
        raise DomainError(f"fixed level must be positive, got {fixed_level}")
    cfg = PalConfig(b, Filter.STAR)
    points = []
    for x in xs:
        Q = level(x, theta, eps) if fixed_level is None else fixed_level
        moduli = admissible_moduli(b, Q)
        errors = [row.error for row in error_table(b, x, moduli, workers).rows]
        points.append(_decay_point(x, Q, errors, count_all(cfg, x)))
    return points


def fit_decay(
    b: int,
    xs: list[int],
    theta: float,
    eps: float,
    workers: int = 1,
    fixed_level: int | None = None,
) -> float:
    """Least-squares slope of -log(aggregate/#P*) against sqrt(log x).

    Sweep points whose aggregate is zero (no admissible q > 1 yet) carry no
    information about the decay rate and are left out of the fit.
    """
    if len(xs) < 3 or any(u >= v for u, v in zip(xs, xs[1:])):
        raise PreconditionError("fit_decay needs at least 3 increasing x values")
    points = decay_points(b, xs, theta, eps, workers=workers, fixed_level=fixed_level)
    return fit_decay_points(points)


def fit_decay_points(points: list[DecayPoint]) -> float:
    """The slope fitted by ``fit_decay``, from precomputed sweep points."""
    pts = [p for p in points if p.normalized > 0]
    if len(pts) < 2:
        raise FitError(f"only {len(pts)} sweep points have a nonzero aggregate error")
    X = np.array([math.sqrt(math.log(p.x)) for p in pts])
    Y = np.array([-math.log(p.normalized) for p in pts])
    slope, _ = np.polyfit(X, Y, 1)
    return float(slope)
