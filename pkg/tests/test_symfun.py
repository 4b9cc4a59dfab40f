import math
from fractions import Fraction

import numpy as np
import pytest

from ribbontau.model import schur_values
from ribbontau.partitions import Partition, enumerate_partitions
from ribbontau.symfun import (
    DegreeError,
    rational_from_string,
    rational_to_string,
    PowerSums,
    SpectralMatrix,
    exp_series_coefficients,
    power_sums_constant,
    power_sums_infinity,
    power_sums_of_matrix,
    scale_power_sums,
    schur_batch,
    schur_content_value,
    schur_from_power_sums,
    schur_p_infinity,
)


class TestPowerSumsOfMatrix:
    def test_diag(self):
        p = power_sums_of_matrix(SpectralMatrix(np.diag([0.3, 0.2])), 2)
        assert p.values[0] == pytest.approx(0.5)
        assert p.values[1] == pytest.approx(0.13)

    def test_identity(self):
        p = power_sums_of_matrix(SpectralMatrix.identity(3), 4)
        assert all(v == pytest.approx(3) for v in p.values)

    def test_projector(self):
        p = power_sums_of_matrix(SpectralMatrix.projector(1, 3), 3)
        assert all(v == pytest.approx(1) for v in p.values)

    def test_non_square(self):
        with pytest.raises(ValueError):
            SpectralMatrix(np.zeros((2, 3)))

    def test_eigenvalue_agreement_checked(self):
        good = SpectralMatrix(entries=np.diag([1.0, 2.0]), eigenvalues=[2.0, 1.0])
        power_sums_of_matrix(good, 3)  # order-insensitive
        bad = SpectralMatrix(entries=np.diag([1.0, 2.0]), eigenvalues=[1.0, 1.0])
        with pytest.raises(ValueError):
            power_sums_of_matrix(bad, 2)

    def test_non_normal_entries(self):
        # strictly upper-triangular: all power sums vanish although the
        # matrix is nonzero; entries path must not eigendecompose
        m = np.array([[0, 1], [0, 0]], dtype=complex)
        p = power_sums_of_matrix(SpectralMatrix(m), 3)
        assert all(abs(v) < 1e-14 for v in p.values)


class TestSchurFromPowerSums:
    def test_column_degree_two(self):
        # s_(1,1) = (p1^2 - p2)/2 = (4 - 2)/2 = 1 at p = (2, 2)
        assert schur_from_power_sums(Partition([1, 1]), PowerSums([2, 2])) == Fraction(1)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_single_row_of_scalar(self, k):
        a = 0.7
        p = power_sums_of_matrix(SpectralMatrix(np.array([[a]])), k)
        assert schur_from_power_sums(Partition([k]), p) == pytest.approx(a**k)

    def test_hook_content_cross_oracle(self):
        p = power_sums_of_matrix(SpectralMatrix.identity(3), 3)
        val = schur_from_power_sums(Partition([2, 1]), p)
        assert val == pytest.approx(8.0)
        assert schur_content_value(Partition([2, 1]), 3, 3) == Fraction(8)

    def test_degree_error_names_requirement(self):
        with pytest.raises(DegreeError) as err:
            schur_from_power_sums(Partition([2, 1]), PowerSums([1.0, 1.0]))
        assert "3" in str(err.value)

    def test_empty_partition(self):
        assert schur_from_power_sums(Partition(), PowerSums([5.0])) == 1


class TestSchurContentValue:
    def test_single_box_is_u(self):
        for u in (Fraction(3, 7), Fraction(-2), Fraction(0)):
            assert schur_content_value(Partition([1]), u, 4) == u

    def test_identity_point(self):
        assert schur_content_value(Partition([2, 1]), 3, 3) == Fraction(8)

    def test_agrees_with_power_sums(self):
        val = schur_content_value(Partition([1, 1]), 2, 5)
        assert val == Fraction(1)
        assert schur_from_power_sums(Partition([1, 1]), PowerSums([Fraction(2)] * 2)) == val

    def test_vanishes_beyond_n_rows(self):
        assert schur_content_value(Partition([1, 1, 1]), Fraction(5, 3), 2) == 0


class TestSchurPInfinity:
    def test_empty(self):
        assert schur_p_infinity(Partition()) == 1

    def test_two_one(self):
        assert schur_p_infinity(Partition([2, 1])) == Fraction(1, 3)

    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    def test_single_row(self, k):
        assert schur_p_infinity(Partition([k])) == Fraction(1, math.factorial(k))

    def test_matches_power_sum_definition(self):
        for lam in enumerate_partitions(5, 5):
            p = power_sums_infinity(max(1, lam.weight))
            assert schur_from_power_sums(lam, PowerSums([Fraction(v) for v in p.values])) == schur_p_infinity(lam)


class TestScale:
    def test_identity_scale(self):
        p = PowerSums([1.0, 2.0, 3.0])
        assert scale_power_sums(p, 1) == p

    def test_by_n(self):
        assert scale_power_sums(PowerSums([1, 0, 0]), 2).values == (2, 0, 0)

    def test_consistency_with_schur(self):
        val = schur_from_power_sums(Partition([1, 1]), scale_power_sums(PowerSums([2, 2]), 1))
        assert val == 1


class TestInvariants:
    def test_cauchy_littlewood_truncation(self):
        rng = np.random.default_rng(3)
        degree, n = 8, 3
        lams = enumerate_partitions(degree, degree)
        for _ in range(3):
            p = PowerSums(0.5 * (rng.uniform(-1, 1, degree) + 1j * rng.uniform(-1, 1, degree)) / np.sqrt(2))
            y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            y *= 0.5 / max(abs(np.linalg.eigvals(y)))
            q = power_sums_of_matrix(SpectralMatrix(y), degree)
            coeffs = [p.values[m - 1] * q.values[m - 1] / m for m in range(1, degree + 1)]
            lhs = sum(exp_series_coefficients(coeffs))
            sp, sq = schur_values(lams, p), schur_values(lams, q)
            rhs = sum(sp[l] * sq[l] for l in lams)
            assert abs(lhs - rhs) <= 1e-12 * abs(rhs)

    def test_vanishing_rule(self):
        rng = np.random.default_rng(4)
        for n in (1, 2, 3):
            y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            y *= 0.8 / max(abs(np.linalg.eigvals(y)))
            p = power_sums_of_matrix(SpectralMatrix(y), 6)
            for lam in enumerate_partitions(6, 6):
                if lam.length > n and lam.weight:
                    assert abs(schur_from_power_sums(lam, p)) < 1e-10

    def test_homogeneity(self):
        rng = np.random.default_rng(5)
        p = PowerSums(rng.uniform(-1, 1, 6) + 1j * rng.uniform(-1, 1, 6))
        c = 0.83 - 0.21j
        scaled = PowerSums([c**m * v for m, v in enumerate(p.values, start=1)])
        for lam in enumerate_partitions(6, 6):
            if lam.weight == 0:
                continue
            v1 = schur_from_power_sums(lam, scaled)
            v2 = c**lam.weight * schur_from_power_sums(lam, p)
            assert abs(v1 - v2) <= 1e-12 * max(1.0, abs(v2))


class TestSeriesHelpers:
    def test_exp_series_single_mode(self):
        a = 0.37
        e = exp_series_coefficients([a, 0, 0, 0, 0])
        for k, ek in enumerate(e):
            assert ek == pytest.approx(a**k / math.factorial(k))

    def test_schur_batch_matches_scalar(self):
        rng = np.random.default_rng(6)
        cols = [rng.standard_normal(10) + 1j * rng.standard_normal(10) for _ in range(5)]
        for lam in enumerate_partitions(5, 3):
            batch = schur_batch(lam, cols)
            for i in range(10):
                ref = schur_from_power_sums(lam, PowerSums([c[i] for c in cols])) if lam.weight else 1.0
                assert batch[i] == pytest.approx(complex(ref), abs=1e-12)

    def test_constant_point(self):
        p = power_sums_constant(Fraction(5, 2), 4)
        assert p.values == (Fraction(5, 2),) * 4
        assert power_sums_infinity(3).is_p_infinity()

    def test_rational_serialization(self):
        assert rational_to_string(Fraction(-8, 6)) == "-4/3"
        assert rational_from_string("-4/3") == Fraction(-4, 3)
        assert rational_from_string("7") == 7
        val = schur_content_value(Partition([2, 1]), Fraction(1, 2), 3)
        assert rational_from_string(rational_to_string(val)) == val
