"""Tests for palinsieve.expsums: phi_b, product specs, sums and their bounds."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from palinsieve.expsums import (
    ProductSpec,
    angle_from_shift,
    big_phi,
    check_agm_product,
    check_decomposition,
    check_exponential_bound,
    check_pairing,
    check_phi_monotone,
    decomposition_bound,
    fit_linfty_decay,
    kloosterman_bound,
    linfty_ratios,
    log_product,
    pal_exp_sum,
    partial_product_spec,
    phi,
    phi_product_spec,
    s_q,
)
from palinsieve.numeric import ZERO_ANGLE, Angle, angle_add, angle_from, angle_scale
from palinsieve.palindromes import Filter, PalConfig, enumerate_palindromes
from palinsieve.util import DomainError, FitError, NoInverseError, PreconditionError


def _phi_direct(b: int, a: float) -> float:
    return abs(sum(cmath.exp(2j * math.pi * c * a) for c in range(b)))


class TestPhi:
    def test_at_zero(self):
        assert phi(10, ZERO_ANGLE) == 10.0

    def test_vanishes_at_multiples_of_one_over_b(self):
        assert phi(5, Angle(1, 5)) == 0.0
        assert phi(4, Angle(1, 2)) == 0.0

    def test_base2_third(self):
        assert phi(2, Angle(1, 3)) == pytest.approx(1.0, rel=1e-12)

    @given(st.integers(2, 12), st.integers(1, 500), st.integers(0, 499))
    @settings(max_examples=200, deadline=None)
    def test_matches_geometric_sum(self, b, den, num):
        a = angle_from(num, den)
        assert phi(b, a) == pytest.approx(_phi_direct(b, float(a)), abs=1e-9)

    def test_bounded_by_b(self):
        assert all(phi(7, angle_from(h, 97)) <= 7 + 1e-12 for h in range(97))

    @given(st.integers(2, 12), st.integers(2, 1000), st.data())
    @settings(max_examples=200, deadline=None)
    def test_even(self, b, den, data):
        num = data.draw(st.integers(1, den - 1))
        mirrored = angle_from(den - num, den)
        value = phi(b, angle_from(num, den))
        assert value == pytest.approx(phi(b, mirrored), abs=1e-12)


class TestProducts:
    def test_empty_product_is_one(self):
        assert big_phi(3, 1, Angle(1, 7)) == 1.0
        assert big_phi(3, 0, Angle(1, 7)) == 1.0

    def test_big_phi_matches_direct(self):
        b, N, a = 3, 4, Angle(2, 11)
        direct = math.prod(
            _phi_direct(b, float(a) * (b**n + b ** (2 * N - n))) for n in range(1, N)
        )
        assert big_phi(b, N, a) == pytest.approx(direct, rel=1e-9)

    def test_log_product_examples(self):
        # (1/3) * (2 + 2^3) = 10/3 = 1/3 mod 1, and phi_2(1/3) = 1
        assert log_product(phi_product_spec(2, 2), Angle(1, 3)).log == pytest.approx(
            0.0, abs=1e-12
        )
        assert log_product(phi_product_spec(7, 5), ZERO_ANGLE).log == pytest.approx(
            4 * math.log(7)
        )
        assert log_product(phi_product_spec(3, 1), Angle(2, 5)).log == 0.0

    @given(
        st.integers(2, 6),
        st.integers(2, 60),
        st.integers(0, 59),
        st.integers(1, 30),
        st.integers(0, 29),
        st.integers(1, 12),
        st.data(),
    )
    @settings(max_examples=150, deadline=None)
    def test_shift_identity(self, b, q, h, beta_den, beta_num, N, data):
        assume(math.gcd(q, b) == 1)
        M = data.draw(st.integers(0, N - 1))
        a = angle_from(h % q, q)
        beta = angle_from(beta_num % beta_den, beta_den)
        inner = log_product(ProductSpec(b, N, M + 1, N - 1, shift=beta), a)
        scaled = angle_scale(angle_add(a, beta), b**M)
        assert inner == log_product(phi_product_spec(b, N - M), scaled)

    def test_zero_factor_gives_zero(self):
        # (2 + 2^3) / 4 = 1/2 mod 1, where phi_2 vanishes
        assert log_product(phi_product_spec(2, 2), Angle(1, 4)).is_zero

    def test_range_must_fit(self):
        with pytest.raises(DomainError, match="not inside"):
            ProductSpec(2, 2, 1, 5)

    def test_partial_spec_range(self):
        spec = partial_product_spec(3, 4, 6)
        assert (spec.lo, spec.hi) == (1, 6)


class TestPalExpSum:
    def test_base2_up_to_8(self):
        # odd-length binary palindromes <= 8: 1, 5, 7
        expected = 2 * cmath.exp(2j * math.pi / 3) + cmath.exp(4j * math.pi / 3)
        assert pal_exp_sum(2, 8, Angle(1, 3)) == pytest.approx(expected, abs=1e-12)

    def test_zero_angle_counts(self):
        cfg = PalConfig(10, Filter.ODD_DIGITS)
        total = sum(1 for _ in enumerate_palindromes(cfg, 10**4))
        assert pal_exp_sum(10, 10**4, ZERO_ANGLE) == pytest.approx(total)

    def test_empty_range(self):
        assert pal_exp_sum(10, 0, Angle(1, 3)) == 0j

    def test_huge_denominator(self):
        a = angle_from(1, 10**12 + 39)
        ns = list(enumerate_palindromes(PalConfig(3, Filter.ODD_DIGITS), 500))
        direct = sum(cmath.exp(2j * math.pi * n / (10**12 + 39)) for n in ns)
        assert pal_exp_sum(3, 500, a) == pytest.approx(direct, abs=1e-9)


class TestDecomposition:
    def test_bound_at_b2_x4(self):
        assert decomposition_bound(2, 4, Angle(1, 3)) == pytest.approx(12.0)

    def test_bound_nonpositive_x(self):
        assert decomposition_bound(2, 0, Angle(1, 3)) == 0.0

    def test_seeded_instances_pass(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            b = int(rng.integers(2, 6))
            x = int(rng.integers(1, 10**5))
            den = int(rng.integers(1, 10**4))
            a = angle_from(int(rng.integers(0, den)), den)
            report = check_decomposition(b, x, a)
            assert report.passed, report


class TestSq:
    def test_small_case(self):
        assert s_q(2, 3, 2, 1, 1) == pytest.approx(1.0)

    def test_no_inverse(self):
        with pytest.raises(NoInverseError):
            s_q(2, 4, 3, 1, 1)

    def test_empty_sum(self):
        assert s_q(10, 7, 0, 1, 1) == 0.0

    def test_kloosterman_bound_dominates_units(self):
        b, q, M = 2, 101, 40
        bound = kloosterman_bound(b, q, M)
        assert max(s_q(b, q, M, a, k) for a in (1, 5, 17) for k in (1, 3, 50)) <= bound


class TestLinfty:
    def test_ratio_decays(self):
        ratios = linfty_ratios(2, 5, 0, [8, 16, 32])
        assert ratios[0] > ratios[1] > ratios[2]

    def test_positive_slope(self):
        assert fit_linfty_decay(2, 5, 0, [8, 16, 32]) > 0

    def test_q_must_be_coprime(self):
        with pytest.raises(DomainError):
            fit_linfty_decay(2, 3, 0, [8, 16])

    def test_fit_needs_two_points(self):
        with pytest.raises(FitError):
            fit_linfty_decay(2, 5, 0, [8])

    def test_shift(self):
        assert angle_from_shift(10, 3) == Angle(1, 330)


class TestExplicitChecks:
    @given(
        st.integers(2, 10),
        st.integers(1, 2000),
        st.integers(0, 1999),
        st.integers(0, 6),
        st.integers(0, 6),
    )
    @settings(max_examples=150, deadline=None)
    def test_pairing(self, b, den, num, beta, gamma):
        assert check_pairing(b, angle_from(num, den), beta, gamma).passed

    @given(st.integers(2, 10), st.integers(10, 5000), st.data())
    @settings(max_examples=150, deadline=None)
    def test_exponential_bound(self, b, den, data):
        num = data.draw(st.integers(-(den // b), den // b))
        assert check_exponential_bound(b, angle_from(num, den)).passed

    def test_exponential_bound_precondition(self):
        with pytest.raises(PreconditionError, match="exceeds"):
            check_exponential_bound(4, Angle(1, 2))

    @given(st.integers(2, 10), st.integers(0, 1000), st.integers(0, 1000))
    @settings(max_examples=150, deadline=None)
    def test_phi_monotone(self, b, i, j):
        delta = angle_from(2 * i, 3 * b * 1000)
        lo = delta.as_fraction()
        t = lo + (1 - 2 * lo) / 2 * j / 1000
        a = angle_from(t.numerator, t.denominator)
        assert check_phi_monotone(b, a, delta).passed

    def test_phi_monotone_precondition(self):
        with pytest.raises(PreconditionError, match="below"):
            check_phi_monotone(10, Angle(1, 100), Angle(1, 20))

    @pytest.mark.parametrize(
        "b,q,h,M,N", [(2, 5, 1, 3, 2), (3, 7, 2, 4, 3), (2, 25, 3, 6, 4)]
    )
    def test_agm_product(self, b, q, h, M, N):
        assert check_agm_product(b, q, h, M, N).passed

    def test_agm_needs_large_prime_factors(self):
        with pytest.raises(PreconditionError, match="prime factor"):
            check_agm_product(3, 6, 1, 2, 2)
