import json

import pytest

from trialkit import data, design, fixtures
from trialkit.design import RESIDUAL, WHOLE_PLOT_ERROR
from trialkit.errors import (ConstraintError, InsufficientLevels, MissingColumn,
                             NonNumericResponse, SchemaError, UnbalancedDesign)


def doc(**kwargs):
    return json.dumps(kwargs)


class TestParseDesign:
    def test_minimal_crd(self):
        spec = design.parse_design(doc(
            kind="crd", response="Yield", factors=[{"name": "Fertilizer"}]))
        assert spec.kind == "crd"
        assert spec.treatment_factors[0].name == "Fertilizer"
        assert spec.alpha == 0.05 and spec.alpha_v == 0.05

    def test_split_plot_strata(self):
        spec = design.parse_design(doc(
            kind="split_plot", response="Yield",
            factors=[{"name": "Irrigation", "stratum": "whole_plot"},
                     {"name": "Variety", "stratum": "sub_plot"}],
            block="Block"))
        assert spec.whole_plot_factor().name == "Irrigation"
        assert spec.sub_plot_factor().name == "Variety"
        assert spec.block_factor.name == "Block"

    def test_rcbd_without_block_is_constraint_error(self):
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="rcbd", response="Y", factors=[{"name": "V"}]))

    def test_unknown_top_level_key(self):
        with pytest.raises(SchemaError):
            design.parse_design(doc(
                kind="crd", response="Y", factors=[{"name": "T"}], extra=1))

    def test_unknown_factor_key(self):
        with pytest.raises(SchemaError):
            design.parse_design(doc(
                kind="crd", response="Y", factors=[{"name": "T", "color": "red"}]))

    def test_alpha_bounds(self):
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="crd", response="Y", factors=[{"name": "T"}], alpha=1.0))
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="crd", response="Y", factors=[{"name": "T"}], alpha_v=0.0))

    def test_met_requires_random_environment(self):
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="met", response="Y",
                factors=[{"name": "G"}, {"name": "E"}]))

    def test_mixed_rejects_random_treatment(self):
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="mixed", response="Y",
                factors=[{"name": "T", "role": "random"}], block="B"))

    def test_stratum_only_for_split_plot(self):
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="factorial", response="Y",
                factors=[{"name": "A", "stratum": "whole_plot"}, {"name": "B"}]))

    def test_not_json(self):
        with pytest.raises(SchemaError):
            design.parse_design("kind: crd")

    def test_duplicate_factor_names(self):
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="factorial", response="Y",
                factors=[{"name": "A"}, {"name": "A"}]))

    def test_mixed_block_role_convention(self):
        spec = design.parse_design(doc(
            kind="mixed", response="Y", factors=[{"name": "T"}],
            block={"name": "B", "role": "random"}))
        assert spec.block_factor.role == "random"
        with pytest.raises(ConstraintError):
            design.parse_design(doc(
                kind="rcbd", response="Y", factors=[{"name": "T"}],
                block={"name": "B", "role": "random"}))


class TestCompileEffects:
    def test_crd(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["crd"])
        es = design.compile_effects(spec)
        assert [e.name for e in es.effects] == ["Fertilizer"]
        assert es.effects[0].denominator == RESIDUAL

    def test_rcbd_order_and_denominators(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["rcbd"])
        es = design.compile_effects(spec)
        assert [e.name for e in es.effects] == ["Variety", "Block"]
        assert all(e.denominator == RESIDUAL for e in es.effects)

    def test_factorial_full_order(self):
        spec = design.parse_design(doc(
            kind="factorial", response="Y",
            factors=[{"name": "A"}, {"name": "B"}, {"name": "C"}]))
        es = design.compile_effects(spec)
        names = [e.name for e in es.effects]
        assert names == ["A", "B", "C", "A x B", "A x C", "B x C", "A x B x C"]

    def test_split_plot_structure(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["split_plot"])
        es = design.compile_effects(spec)
        by_name = {e.name: e for e in es.effects}
        assert by_name["Irrigation"].denominator == WHOLE_PLOT_ERROR
        assert by_name["Block"].denominator == WHOLE_PLOT_ERROR
        assert by_name["Variety"].denominator == RESIDUAL
        assert by_name["Irrigation x Variety"].denominator == RESIDUAL
        assert by_name["Block x Irrigation"].denominator == RESIDUAL
        labels = es.stratum_labels()
        assert labels == (WHOLE_PLOT_ERROR, RESIDUAL)

    def test_met(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["gxe"])
        es = design.compile_effects(spec)
        assert [e.name for e in es.effects] == [
            "Genotype", "Environment", "Genotype x Environment"]
        assert es.effects[1].role == "random"
        assert es.effects[2].role == "random"

    def test_deterministic(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["split_plot"])
        assert design.compile_effects(spec) == design.compile_effects(spec)

    @pytest.mark.parametrize("name", list(fixtures.DESIGN_DOCUMENTS))
    def test_referential_integrity_and_marginality(self, name):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS[name])
        es = design.compile_effects(spec)
        labels = set(es.stratum_labels())
        present = {e.factors for e in es.effects}
        for e in es.effects:
            assert e.denominator in labels
            assert e.order == len(e.factors)
            if e.order > 1:
                for f in e.factors:
                    assert (f,) in present  # marginality closure

    def test_split_plot_never_residual_for_wp_and_block(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["split_plot"])
        es = design.compile_effects(spec)
        wp = spec.whole_plot_factor().name
        blk = spec.block_factor.name
        for e in es.effects:
            if e.factors in ((wp,), (blk,)):
                assert e.denominator != RESIDUAL


class TestValidateAgainstData:
    def test_crd_replication(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["crd"])
        vd = design.validate_against_data(spec, data.builtin_dataset("crd"))
        assert vd.replicates == 5
        assert vd.levels["Fertilizer"] == ("Control", "NPK50", "NPK75", "NPK100")

    def test_missing_block_column(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["rcbd"])
        ds = data.builtin_dataset("crd")  # has no Block column
        with pytest.raises(MissingColumn):
            design.validate_against_data(spec, ds)

    def test_unbalanced_names_first_cell(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["crd"])
        ds = data.builtin_dataset("crd")
        trimmed = data.Dataset(ds.names, ds.cells[:-1], ds.numeric_columns)
        with pytest.raises(UnbalancedDesign) as err:
            design.validate_against_data(spec, trimmed)
        assert "NPK100" in str(err.value)
        assert err.value.details["observed"] == 4
        assert err.value.details["expected"] == 5

    def test_missing_cell_combination(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["rcbd"])
        ds = data.builtin_dataset("rcbd")
        # rename one cell's block level so a hole appears in the grid
        cells = [list(r) for r in ds.cells]
        cells[0][1] = "B9"
        patched = data.Dataset(ds.names, tuple(tuple(r) for r in cells),
                               ds.numeric_columns)
        with pytest.raises(UnbalancedDesign):
            design.validate_against_data(spec, patched)

    def test_insufficient_levels(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["crd"])
        ds = data.from_columns(["Fertilizer", "Yield"],
                               [["only"] * 4, [1.0, 2.0, 3.0, 4.0]])
        with pytest.raises(InsufficientLevels):
            design.validate_against_data(spec, ds)

    def test_non_numeric_response(self):
        spec = design.design_from_document(fixtures.DESIGN_DOCUMENTS["crd"])
        ds = data.from_columns(["Fertilizer", "Yield"],
                               [["a", "a", "b", "b"], ["x", "y", "x", "y"]])
        with pytest.raises(NonNumericResponse):
            design.validate_against_data(spec, ds)
