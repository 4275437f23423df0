"""Tests for palinsieve.moments: compositions, coefficient vectors, moments."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palinsieve.expsums import big_phi
from palinsieve.moments import (
    C_COMP,
    FAREY_C,
    average_sum,
    check_spaced_moment,
    coeff_vector,
    composition_error,
    composition_table,
    farey_bound,
    farey_moment_sum,
    farey_points,
    moment_exact,
    moment_quadrature,
    moment_ratio,
    r_exact,
    r_gauss,
    r_inclusion_exclusion,
)
from palinsieve.numeric import Angle, angle_from
from palinsieve.util import DomainError, PreconditionError, ResourceGuardError


class TestCompositions:
    def test_small_table(self):
        assert composition_table(2, 3).values == (1, 2, 3, 2, 1)

    def test_outside_range_is_zero(self):
        assert r_exact(-1, 3, 10) == 0
        assert r_exact(28, 3, 10) == 0

    def test_total_is_b_to_k(self):
        assert sum(composition_table(7, 5).values) == 5**7

    @given(st.integers(1, 30), st.integers(2, 10), st.data())
    @settings(max_examples=150, deadline=None)
    def test_inclusion_exclusion_agrees(self, K, b, data):
        n = data.draw(st.integers(-2, (b - 1) * K + 2))
        assert r_exact(n, K, b) == r_inclusion_exclusion(n, K, b)

    def test_gauss_normalized(self):
        K, b = 64, 10
        total = sum(r_gauss(n, K, b) for n in range((b - 1) * K + 1))
        assert total == pytest.approx(1.0, rel=1e-3)

    def test_domain(self):
        with pytest.raises(DomainError):
            composition_table(0, 10)

    @pytest.mark.parametrize("b", range(2, 11))
    def test_symmetric(self, b):
        for K in range(1, 65):
            values = composition_table(K, b).values
            assert values == values[::-1], K
            assert len(values) == (b - 1) * K + 1

    @pytest.mark.parametrize("b", [2, 3, 5, 10])
    @pytest.mark.parametrize("K", [4, 8, 16, 32])
    def test_error_within_frozen_constant(self, b, K):
        assert composition_error(b, K) <= C_COMP

    @pytest.mark.slow
    def test_error_law_full_grid(self):
        worst = max(
            composition_error(b, K) for b in (2, 3, 5, 10) for K in range(4, 129)
        )
        assert worst <= C_COMP


class TestCoeffVector:
    def test_base2_n3_k1(self):
        cv = coeff_vector(2, 3, 1)
        assert sorted(cv.coeffs) == [0, 20, 34, 54]
        assert set(cv.coeffs.values()) == {1}
        assert moment_exact(2, 3, 1) == 4

    def test_n1_is_constant(self):
        assert coeff_vector(3, 1, 2).coeffs == {0: 1}

    def test_trigonometric_identity(self):
        b, N, K = 3, 3, 2
        cv = coeff_vector(b, N, K)
        a = Angle(5, 17)
        value = sum(
            c * np.exp(2j * np.pi * (ell * 5 % 17) / 17) for ell, c in cv.coeffs.items()
        )
        assert abs(value) == pytest.approx(big_phi(b, N, a) ** K, rel=1e-9)

    def test_dense_and_sparse_agree(self):
        from palinsieve.moments import _dense_convolve, _positions, _sparse_convolve

        table = composition_table(2, 3).values
        positions = _positions(3, 3)
        size = 2 * 3**6
        assert _dense_convolve(table, positions, size) == _sparse_convolve(
            table, positions
        )

    @pytest.mark.parametrize("b", [2, 3, 5])
    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_coefficient_mass_and_floor(self, b, N, K):
        cv = coeff_vector(b, N, K)
        assert sum(cv.coeffs.values()) == b ** (K * (N - 1))
        # Cauchy-Schwarz over at most K b^(2N) + 1 nonzero coefficients
        moment = moment_exact(b, N, K)
        assert moment * (K * b ** (2 * N) + 1) >= b ** (2 * K * (N - 1))

    def test_size_guard(self, config_dir):
        (config_dir / "config.json").write_text('{"max_coeff_size": 100}')
        with pytest.raises(ResourceGuardError, match="max_coeff_size"):
            coeff_vector(10, 2, 1)


class TestParseval:
    def test_quadrature_small(self):
        assert float(moment_quadrature(2, 2, 1, 64)) == pytest.approx(2.0, rel=1e-9)

    def test_quadrature_grid_precondition(self):
        with pytest.raises(PreconditionError, match="grid"):
            moment_quadrature(2, 3, 1, 100)

    def test_grid_guard_follows_precondition(self):
        # 4 * K * b^(2N) = 324 for (3, 2, 1), so a 256-point grid is refused
        with pytest.raises(PreconditionError, match="324"):
            moment_quadrature(3, 2, 1, 256)
        assert float(moment_quadrature(3, 2, 1, 324)) == pytest.approx(3.0, rel=1e-9)
        assert moment_exact(3, 2, 1) == 3

    def test_quadrature_returns_mpf(self):
        assert isinstance(moment_quadrature(2, 3, 2, 4 * 2 * 2**6), mpmath.mpf)

    @pytest.mark.parametrize("b,N,K", [(2, 3, 1), (2, 4, 2), (3, 3, 1), (5, 2, 3)])
    def test_exact_matches_quadrature(self, b, N, K):
        exact = moment_exact(b, N, K)
        quad = moment_quadrature(b, N, K, 4 * K * b ** (2 * N))
        assert float(abs(quad - exact) / exact) <= 1e-6

    @pytest.mark.slow
    def test_parseval_sweep(self):
        for b in (2, 3, 5, 10):
            for K in range(1, 5):
                N = 1
                while K * b ** (2 * N) <= 10**5:
                    exact = moment_exact(b, N, K)
                    quad = moment_quadrature(b, N, K, 4 * K * b ** (2 * N))
                    assert float(abs(quad - exact) / exact) <= 1e-6, (b, N, K)
                    N += 1

    def test_exact_small_cases(self):
        assert moment_exact(2, 2, 1) == 2
        assert moment_exact(2, 2, 2) == 6
        assert moment_exact(5, 1, 3) == 1

    def test_moment_ratio_default_moment(self):
        assert moment_ratio(2, 2, 1) == pytest.approx(0.5**0.25 - 1)

    def test_moment_ratio_trivial_bound(self):
        # 1 <= moment <= b^(2K(N-1)) keeps rho inside (-1, b)
        b, N, K = 3, 3, 2
        rho = moment_ratio(b, N, K, moment_exact(b, N, K))
        assert -1 < rho < b


class TestFarey:
    def test_points_order_3(self):
        assert farey_points(3) == [Angle(0, 1), Angle(1, 2), Angle(1, 3), Angle(2, 3)]

    def test_points_domain(self):
        with pytest.raises(DomainError):
            farey_points(0)

    def test_sum_matches_direct(self):
        b, N, K, Q = 2, 3, 1, 5
        direct = sum(big_phi(b, N, a) ** (2 * K) for a in farey_points(Q))
        assert float(farey_moment_sum(b, N, K, Q)) == pytest.approx(direct, rel=1e-9)

    def test_seeded_grid_within_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            b = int(rng.integers(2, 4))
            N = int(rng.integers(1, 5))
            K = int(rng.integers(1, 4))
            Q = int(rng.integers(1, 33))
            assert farey_moment_sum(b, N, K, Q) <= farey_bound(b, N, K, Q), (b, N, K, Q)

    def test_frozen_constant(self):
        assert FAREY_C == 2.0

    def test_shift(self):
        beta = angle_from(1, 6)
        expected = big_phi(2, 2, beta) ** 2
        assert float(farey_moment_sum(2, 2, 1, 1, beta)) == pytest.approx(expected)


class TestSpacedMoment:
    def test_farey_points_pass(self):
        Q = 5
        report = check_spaced_moment(2, 3, 2, farey_points(Q), Fraction(1, Q * Q))
        assert report.passed

    def test_spacing_enforced(self):
        with pytest.raises(PreconditionError, match="closer"):
            check_spaced_moment(2, 2, 1, [Angle(0, 1), Angle(1, 100)], Fraction(1, 10))

    def test_delta_range(self):
        with pytest.raises(PreconditionError, match="spacing"):
            check_spaced_moment(2, 2, 1, [Angle(0, 1)], Fraction(3, 4))


class TestAverageSum:
    def test_trivial_bound_dominates(self):
        avg = average_sum(3, 3, 10)
        assert 0 < avg.total <= avg.trivial
        assert avg.ratio == pytest.approx(avg.total / avg.trivial)

    def test_only_coprime_denominators(self):
        # for b = 2 only odd q count: q = 1, 3 give 1 + 2 fractions
        avg = average_sum(2, 1, 4)
        assert avg.trivial == 3 * 2**0
        assert math.isclose(avg.total, 3.0)
