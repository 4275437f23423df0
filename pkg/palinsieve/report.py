"""Outcome record shared by every inequality check."""

from dataclasses import dataclass, field
from typing import Any

import mpmath

# Relative slack for float comparisons of explicit inequalities.
RTOL = 1e-9


@dataclass
class LemmaReport:
    """One evaluated instance of an inequality ``lhs <= rhs``.

    ``explicit`` checks carry a pass/fail verdict. Ratio-form checks (bounds
    with an unspecified implied constant) report ``ratio``; ``passed`` is
    None, or the verdict against a frozen empirical threshold when the
    check has one.
    """

    lemma_id: str
    instance: dict[str, Any] = field(default_factory=dict)
    lhs: Any = 0.0
    rhs: Any = 0.0
    ratio: Any = 0.0
    passed: bool | None = None
    explicit: bool = True


def make_report(
    lemma_id: str,
    instance: dict[str, Any],
    lhs,
    rhs,
    explicit: bool = True,
    rtol: float = RTOL,
) -> LemmaReport:
    """Build a report, computing ``ratio`` and, for explicit checks, ``passed``."""
    if rhs == 0:
        ratio = 0.0 if lhs == 0 else mpmath.inf
    else:
        ratio = lhs / rhs
    passed = None
    if explicit:
        passed = bool(lhs <= rhs * (1 + rtol))
    return LemmaReport(
        lemma_id=lemma_id,
        instance=instance,
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        passed=passed,
        explicit=explicit,
    )
