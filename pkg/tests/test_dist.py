import math

import numpy as np
import pytest

import oracles
from frozen_values import MC_RANGE_QUANTILES
from trialkit import dist
from trialkit.errors import DomainError


class TestIncompleteBeta:
    def test_boundaries(self):
        assert dist.incomplete_beta(2.0, 5.0, 0.0) == 0.0
        assert dist.incomplete_beta(2.0, 5.0, 1.0) == 1.0

    def test_uniform_case_is_identity(self):
        for x in np.linspace(0.0, 1.0, 21):
            assert dist.incomplete_beta(1.0, 1.0, float(x)) == pytest.approx(x, abs=1e-14)

    def test_against_simpson_oracle(self):
        expected = oracles.simpson_beta_cdf(2.0, 3.0, 0.4, panels=1_000_000)
        assert dist.incomplete_beta(2.0, 3.0, 0.4) == pytest.approx(expected, abs=1e-12)

    def test_symmetry(self):
        # I_x(a,b) = 1 - I_{1-x}(b,a)
        for a, b, x in [(2.5, 7.0, 0.3), (0.5, 0.5, 0.8), (10.0, 3.0, 0.6)]:
            lhs = dist.incomplete_beta(a, b, x)
            rhs = 1.0 - dist.incomplete_beta(b, a, 1.0 - x)
            assert lhs == pytest.approx(rhs, abs=1e-13)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            dist.incomplete_beta(-1.0, 2.0, 0.5)
        with pytest.raises(DomainError):
            dist.incomplete_beta(1.0, 2.0, 1.5)


class TestFSf:
    def test_zero_statistic(self):
        assert dist.f_sf(0.0, 3, 16) == 1.0

    def test_printed_table_values(self):
        assert dist.f_sf(145.333, 3, 16) < 0.001
        assert dist.f_sf(1.5, 2, 12) == pytest.approx(0.262, abs=0.001)

    def test_against_simpson_oracle_grid(self):
        # 50 points; df1 >= 2 keeps the density finite at 0 for Simpson
        grid = [(f, d1, d2)
                for d1 in (2, 3, 4, 6, 9)
                for d2 in (8, 12, 16, 20, 30)
                for f in (0.5, 2.5)]
        assert len(grid) == 50
        for f, d1, d2 in grid:
            expected = oracles.simpson_f_sf(f, d1, d2, panels=200_000)
            assert dist.f_sf(f, d1, d2) == pytest.approx(expected, abs=1e-8), (f, d1, d2)

    def test_t_identity_df1_one(self):
        for f in (0.2, 1.0, 2.7, 9.4):
            for df in (4, 9, 16, 40):
                assert dist.f_sf(f, 1, df) == pytest.approx(
                    2.0 * dist.t_sf(math.sqrt(f), df), abs=1e-8)

    def test_monotone_nonincreasing(self):
        fs = np.linspace(0.0, 20.0, 200)
        vals = [dist.f_sf(float(f), 4, 12) for f in fs]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)


class TestStudentizedRange:
    def test_zero_statistic(self):
        assert dist.studentized_range_sf(0.0, 4, 16) == 1.0

    def test_k2_reduces_to_t(self):
        for q in (0.8, 1.5, 2.5, 4.0):
            for df in (6, 10, 16):
                expected = 2.0 * dist.t_sf(q / math.sqrt(2.0), df)
                got = dist.studentized_range_sf(q, 2, df)
                assert got == pytest.approx(expected, abs=5e-5)

    def test_sf_monotone_and_bounded(self):
        qs = np.linspace(0.0, 8.0, 60)
        vals = [dist.studentized_range_sf(float(q), 3, 12) for q in qs]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(a >= b - 5e-6 for a, b in zip(vals, vals[1:]))

    def test_quantile_inverts_sf(self):
        for alpha in (0.01, 0.05, 0.25, 0.5):
            for k in (2, 4, 6):
                for df in (8, 16):
                    q = dist.studentized_range_quantile(alpha, k, df)
                    assert dist.studentized_range_sf(q, k, df) == pytest.approx(
                        alpha, abs=1e-4)

    def test_median_k2_matches_t_scaling(self):
        # SF(q; 2, df) = 0.5 at q = sqrt(2) * |T|-median
        for df in (5, 12, 25):
            q = dist.studentized_range_quantile(0.5, 2, df)
            t_med = q / math.sqrt(2.0)
            assert 2.0 * dist.t_sf(t_med, df) == pytest.approx(0.5, abs=1e-4)

    def test_against_frozen_monte_carlo(self):
        for (alpha, k, df), mc_q in MC_RANGE_QUANTILES.items():
            q = dist.studentized_range_quantile(alpha, k, df)
            assert q == pytest.approx(mc_q, abs=0.02), (alpha, k, df)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            dist.studentized_range_sf(-1.0, 4, 10)
        with pytest.raises(DomainError):
            dist.studentized_range_sf(1.0, 1, 10)
        with pytest.raises(DomainError):
            dist.studentized_range_quantile(1.5, 4, 10)


class TestNormal:
    def test_quantile_roundtrip(self):
        for p in (1e-10, 0.001, 0.3, 0.5, 0.9, 0.999, 1 - 1e-10):
            z = dist.normal_quantile(p)
            assert dist.normal_cdf(z) == pytest.approx(p, rel=1e-12, abs=1e-13)

    def test_sf_symmetry(self):
        for z in (-3.0, -0.5, 0.0, 1.7):
            assert dist.normal_sf(z) == pytest.approx(dist.normal_cdf(-z), abs=1e-15)
