"""Tests for palinsieve.palindromes: enumeration order, filters, exact counts."""

import math

import pytest

from palinsieve.palindromes import (
    C_STAR,
    Filter,
    PalConfig,
    class_counts,
    count_all,
    count_pi,
    count_pi_star,
    digit_weights,
    enumerate_block,
    enumerate_palindromes,
    gamma2,
    is_palindrome,
    star_density_band,
    star_residual_bound,
)
from palinsieve.util import DomainError


def _digits(n: int, b: int) -> list[int]:
    out = []
    while n:
        n, d = divmod(n, b)
        out.append(d)
    return out


def _brute(b: int, x: int) -> list[int]:
    return [n for n in range(1, x + 1) if _digits(n, b) == _digits(n, b)[::-1]]


class TestIsPalindrome:
    @pytest.mark.parametrize(
        "n,b,expected",
        [(5, 2, True), (12, 10, False), (7, 10, True), (585585, 10, True)],
    )
    def test_examples(self, n, b, expected):
        assert is_palindrome(n, b) is expected

    def test_agrees_with_enumeration(self):
        values = set(enumerate_palindromes(PalConfig(3), 2000))
        assert values == {n for n in range(1, 2001) if is_palindrome(n, 3)}

    def test_domain(self):
        with pytest.raises(DomainError):
            is_palindrome(0, 10)


class TestEnumerate:
    def test_base10_up_to_100(self):
        values = list(enumerate_palindromes(PalConfig(10), 100))
        assert values == [1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 22, 33, 44, 55, 66, 77, 88, 99]

    def test_base2_filters_up_to_8(self):
        for flt in (Filter.ODD_DIGITS, Filter.STAR):
            assert list(enumerate_palindromes(PalConfig(2, flt), 8)) == [1, 5, 7]

    def test_base2_up_to_10(self):
        assert list(enumerate_palindromes(PalConfig(2), 10)) == [1, 3, 5, 7, 9]

    def test_nothing_below_one(self):
        assert list(enumerate_palindromes(PalConfig(10), 0)) == []

    @pytest.mark.parametrize("b,x", [(2, 2000), (3, 3000), (5, 1000), (10, 12345)])
    def test_matches_brute_force(self, b, x):
        assert list(enumerate_palindromes(PalConfig(b), x)) == _brute(b, x)

    def test_strictly_increasing(self):
        values = list(enumerate_palindromes(PalConfig(3), 10**5))
        assert all(u < v for u, v in zip(values, values[1:]))

    def test_odd_filter_drops_even_lengths(self):
        values = list(enumerate_palindromes(PalConfig(10, Filter.ODD_DIGITS), 1000))
        assert 11 not in values
        assert 101 in values
        assert all(len(str(n)) % 2 == 1 for n in values)

    def test_star_filter(self):
        values = list(enumerate_palindromes(PalConfig(10, Filter.STAR), 10**5))
        assert values
        assert all(math.gcd(n, 990) == 1 and len(str(n)) % 2 == 1 for n in values)
        assert 1 in values and 7 in values and 3 not in values

    def test_block(self):
        block = list(enumerate_block(PalConfig(10), 3, 200))
        assert block[0] == 101 and block[-1] == 191
        assert len(block) == 10

    def test_block_length_must_be_positive(self):
        with pytest.raises(DomainError):
            enumerate_block(PalConfig(10), 0, 100)

    def test_base_must_be_at_least_two(self):
        with pytest.raises(DomainError, match="base"):
            PalConfig(1)

    def test_digit_weights(self):
        assert digit_weights(10, 5) == [10001, 1010, 100]
        assert digit_weights(10, 4) == [1001, 110]


class TestCounts:
    @pytest.mark.parametrize("b", [2, 3, 5, 10])
    @pytest.mark.parametrize("N", [0, 1, 2, 3])
    def test_count_pi_matches_enumeration(self, b, N):
        length = 2 * N + 1
        seen = sum(1 for _ in enumerate_block(PalConfig(b), length, b**length - 1))
        assert count_pi(b, N) == seen == (b - 1) * b**N

    def test_count_all(self):
        assert count_all(PalConfig(10), 100) == 18

    def test_count_pi_domain(self):
        with pytest.raises(DomainError):
            count_pi(10, -1)

    def test_gamma2(self):
        assert gamma2(10) == pytest.approx(10 / 9)
        assert gamma2(3) == 1

    @pytest.mark.parametrize("b", [2, 3, 5, 10])
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_star_residual_within_frozen_bound(self, b, N):
        star = count_pi_star(b, N)
        assert abs(star.residual) <= star_residual_bound(b)

    @pytest.mark.slow
    @pytest.mark.parametrize("b", range(2, 11))
    def test_counts_full_grid(self, b):
        for N in range(7):
            length = 2 * N + 1
            seen = sum(1 for _ in enumerate_block(PalConfig(b), length, b**length - 1))
            assert count_pi(b, N) == seen, N
            star = count_pi_star(b, N)
            assert abs(star.residual) <= star_residual_bound(b), N

    def test_count_pi_star_base2(self):
        # 101 = 5 and 111 = 7; main term gamma2(2) * phi(6)/6 * 2 = 4/3
        star = count_pi_star(2, 1)
        assert star.exact == 2
        assert star.main_term == pytest.approx(4 / 3)
        assert star.residual == pytest.approx(2 / 3)

    def test_star_residual_bound_formula(self):
        # tau(99) = 6
        assert star_residual_bound(10) == C_STAR * 100 * 6

    def test_class_counts_sum_to_total(self):
        counts = class_counts(PalConfig(10, Filter.STAR), 10**5, 7)
        assert sum(counts) == count_all(PalConfig(10, Filter.STAR), 10**5)
        assert len(counts) == 7

    def test_class_counts_parity_up_to_100(self):
        # evens: 2, 4, 6, 8 and 22, 44, 66, 88
        assert class_counts(PalConfig(10), 100, 2) == [8, 10]

    def test_class_counts_modulus(self):
        with pytest.raises(DomainError, match="modulus"):
            class_counts(PalConfig(10), 100, 0)

    def test_star_density_band_is_bounded(self):
        band = star_density_band(10, [10**3, 10**5, 10**7])
        assert all(0.01 < v < 10 for v in band)
