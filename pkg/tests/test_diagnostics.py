import math

import numpy as np
import pytest

import oracles
from trialkit import data, design, diagnostics, engine, fixtures, mixed, pipeline
from trialkit.errors import InsufficientGroups, SampleTooSmall, ZeroVariance


def fixture_result(name):
    ds = data.builtin_dataset(name)
    spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS[name])
    return pipeline.analyze(spec, ds)


class TestResidualsByStratum:
    def test_crd_single_stratum(self):
        res = fixture_result("crd")
        strata = diagnostics.residuals_by_stratum(res.model, res.design)
        assert list(strata) == ["residual"]
        assert strata["residual"].size == 20

    def test_split_plot_two_strata_with_expected_df(self):
        res = fixture_result("split_plot")
        strata = diagnostics.residuals_by_stratum(res.model, res.design)
        assert list(strata) == ["whole_plot", "residual"]
        assert strata["whole_plot"].size == 9  # 3 blocks x 3 whole plots
        assert strata["residual"].size == 27
        # the matching anova rows carry df 4 and 12
        assert res.anova.row("Block x Irrigation").df == 4
        assert res.anova.residual.df == 12

    def test_mixed_conditional_residuals_zero_shrinkage_limit(self):
        # equal block means force the block component to clamp at zero, so
        # conditional residuals equal the treatment-only residuals
        vals = [10.0, 11.0, 9.0, 10.0,
                11.0, 10.0, 10.0, 9.0,
                9.0, 10.0, 11.0, 10.0]
        ds = data.from_columns(
            ["T", "B", "Y"],
            [[t for t in ("T1", "T2", "T3") for _ in range(4)],
             ["B1", "B2", "B3", "B4"] * 3, vals])
        spec = design.parse_design(
            '{"kind": "mixed", "response": "Y", "factors": [{"name": "T"}], '
            '"block": "B"}')
        vd = design.validate_against_data(spec, ds)
        model = engine.fit(vd, ds)
        table = engine.anova(vd, model)
        vc = mixed.estimate_components(table, vd)
        assert vc.components["B"] == 0.0
        strata = diagnostics.residuals_by_stratum(model, vd, vc)
        y = ds.numeric("Y")
        tau = model.deviations_vector(("T",))[model.codes["T"]]
        raw_wo_block = y - model.grand_mean - tau
        assert np.allclose(strata["residual"], raw_wo_block, atol=1e-12)

    def test_mixed_conditional_residuals_full_shrinkage_limit(self):
        res = fixture_result("lmm")
        strata = diagnostics.residuals_by_stratum(
            res.model, res.design, res.variance_components)
        lam = 1.22 / (1.22 + 0.44 / 3)
        b_dev = res.model.deviations_vector(("Block",))[res.model.codes["Block"]]
        expected = res.model.residuals + (1 - lam) * b_dev
        assert np.allclose(strata["residual"], expected, atol=1e-12)


class TestShapiroWilk:
    def test_n3_closed_form(self):
        w, p = diagnostics.shapiro_wilk([0.0, 1.0, 2.0])
        # a1 = 1/sqrt(2); W = (a1 * (x3 - x1))^2 / sum((x - mean)^2) = 1
        assert w == pytest.approx(1.0, abs=1e-12)
        assert p == pytest.approx(1.0, abs=1e-9)

    def test_constant_vector(self):
        with pytest.raises(ZeroVariance):
            diagnostics.shapiro_wilk([3.0, 3.0, 3.0, 3.0])

    def test_sample_size_bounds(self):
        with pytest.raises(SampleTooSmall):
            diagnostics.shapiro_wilk([1.0, 2.0])

    def test_location_scale_invariance_exact(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(25)
        w1, _ = diagnostics.shapiro_wilk(x)
        w2, _ = diagnostics.shapiro_wilk(3.7 * x + 11.0)
        assert w1 == pytest.approx(w2, abs=1e-12)

    def test_w_within_unit_interval(self):
        rng = np.random.default_rng(9)
        for n in (3, 5, 9, 17, 40):
            for _ in range(10):
                w, p = diagnostics.shapiro_wilk(rng.standard_normal(n))
                assert 0.0 < w <= 1.0
                assert 0.0 < p <= 1.0

    def test_p_matches_monte_carlo_null_oracle(self):
        rng = np.random.default_rng(2177)
        x = rng.standard_t(2, size=20)  # fixed seeded heavy-tailed sample
        w, p = diagnostics.shapiro_wilk(x)
        p_mc = oracles.mc_shapiro_null_p(w, 20, sims=200_000)
        assert p == pytest.approx(p_mc, abs=0.02)


class TestLevene:
    def test_equal_spread_pair(self):
        f, p = diagnostics.levene({"a": np.array([1.0, 2.0, 3.0]),
                                   "b": np.array([4.0, 5.0, 6.0])})
        assert f == 0.0
        assert p == 1.0

    def test_scaled_group_detected(self):
        base = np.array([0.3, -1.2, 0.8, 1.9, -0.6, 0.1, -1.5, 0.9, -0.2, 0.5])
        f, p = diagnostics.levene({"a": base, "b": base * 10.0})
        # direct computation on the fixed vectors
        za = np.abs(base - np.median(base))
        zb = np.abs(base * 10 - np.median(base * 10))
        grand = np.concatenate([za, zb]).mean()
        ssb = 10 * (za.mean() - grand) ** 2 + 10 * (zb.mean() - grand) ** 2
        ssw = ((za - za.mean()) ** 2).sum() + ((zb - zb.mean()) ** 2).sum()
        f_expect = (ssb / 1) / (ssw / 18)
        assert f == pytest.approx(f_expect, rel=1e-12)
        assert p < 0.05

    def test_single_group(self):
        with pytest.raises(InsufficientGroups):
            diagnostics.levene({"a": np.array([1.0, 2.0, 3.0])})

    def test_shift_invariance_per_group(self):
        rng = np.random.default_rng(4)
        g1 = rng.normal(0, 1, 8)
        g2 = rng.normal(0, 2, 8)
        f1, p1 = diagnostics.levene({"a": g1, "b": g2})
        f2, p2 = diagnostics.levene({"a": g1 + 100.0, "b": g2 - 55.0})
        assert f1 == pytest.approx(f2, rel=1e-10)
        assert p1 == pytest.approx(p2, rel=1e-10)


class TestValidity:
    def test_fixture_normality_calls(self):
        # the bundled fixtures reproduce the published pass/fail pattern
        crd = fixture_result("crd").diagnostics
        assert crd.entries[0].shapiro_p == pytest.approx(0.0345, abs=5e-4)
        assert not crd.entries[0].normality_ok
        assert not crd.overall_valid

        rcbd = fixture_result("rcbd").diagnostics
        assert rcbd.entries[0].shapiro_p == pytest.approx(0.064, abs=5e-4)
        assert rcbd.overall_valid

        fact = fixture_result("factorial").diagnostics
        assert fact.entries[0].shapiro_p == pytest.approx(0.0016, abs=2e-4)
        assert not fact.overall_valid

        gxe = fixture_result("gxe").diagnostics
        assert gxe.entries[0].shapiro_p == pytest.approx(0.121, abs=5e-4)
        assert gxe.overall_valid

    def test_validity_pure_function_of_pvalues(self):
        tests = {
            "residual": {"shapiro": (0.95, 0.034), "levene": (1.2, 0.4)},
        }
        rep = diagnostics.validity(tests, 0.05)
        assert not rep.entries[0].normality_ok
        assert rep.entries[0].homogeneity_ok
        assert not rep.overall_valid
        rep2 = diagnostics.validity(
            {"residual": {"shapiro": (0.97, 0.064), "levene": (1.2, 0.4)}}, 0.05)
        assert rep2.overall_valid

    def test_alpha_v_zero_is_vacuously_valid(self):
        tests = {
            "residual": {"shapiro": (0.5, 1e-300), "levene": (99.0, 1e-300)},
        }
        rep = diagnostics.validity(tests, 0.0)
        assert rep.overall_valid

    def test_order_independence(self):
        a = {"s1": {"shapiro": (0.9, 0.2), "levene": (1.0, 0.3)},
             "s2": {"shapiro": (0.9, 0.01), "levene": (1.0, 0.3)}}
        b = dict(reversed(list(a.items())))
        ra = diagnostics.validity(a, 0.05)
        rb = diagnostics.validity(b, 0.05)
        assert ra.overall_valid == rb.overall_valid == False  # noqa: E712

    def test_violations_annotate_but_do_not_halt(self):
        res = fixture_result("factorial")  # normality violated
        assert not res.diagnostics.overall_valid
        assert res.recommendation.validity_caveats
        assert res.recommendation.top_group  # analysis still concluded
