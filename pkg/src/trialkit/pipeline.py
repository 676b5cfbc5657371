"""End-to-end analysis: design + data in, structured conclusions out.

Phase one resolves the declared design against the data and fits the
compiled model; phase two runs the stratum-aware tests, restricts the
interpretation domain, checks assumptions, estimates variance components
where random factors are declared, and hands everything to the decision
layer. The result object carries every intermediate product so reports and
plots need no recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import decision, diagnostics, inference, mixed, stability
from .data import Dataset, partition
from .design import DesignSpec, EffectSet, ValidatedDesign, compile_effects, validate_against_data
from .engine import AnovaTable, FittedModel, GroupOutcome, anova, fit
from .errors import AnalysisError


@dataclass(frozen=True)
class AnalysisResult:
    design: ValidatedDesign
    effects: EffectSet
    model: FittedModel
    anova: AnovaTable
    tests: tuple[inference.EffectTest, ...]
    domain: inference.AdmissibleDomain
    comparisons: list[inference.ComparisonSet]
    diagnostics: diagnostics.DiagnosticReport
    variance_components: mixed.VarianceComponents | None
    blups: mixed.BlupTable | None
    heritability: mixed.HeritabilityEstimate | None
    stability: stability.StabilityResult | None
    recommendation: decision.Recommendation
    data: Dataset
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def spec(self) -> DesignSpec:
        return self.design.spec


@dataclass(frozen=True)
class GroupedAnalysisResult:
    group_factors: tuple[str, ...]
    keys: tuple[tuple[str, ...], ...]
    outcomes: dict[tuple[str, ...], GroupOutcome]

    def items(self):
        return ((k, self.outcomes[k]) for k in self.keys)


def analyze(spec: DesignSpec, data: Dataset, alpha: float | None = None,
            alpha_v: float | None = None, minimize: bool = False) -> AnalysisResult:
    """Run the full pipeline for a single (unpartitioned) dataset."""
    alpha = spec.alpha if alpha is None else alpha
    alpha_v = spec.alpha_v if alpha_v is None else alpha_v

    vd = validate_against_data(spec, data)
    effects = compile_effects(spec)
    model = fit(vd, data)
    table = anova(vd, model, effects)

    warnings = [f"degenerate F test for '{r.source}': zero denominator mean square"
                for r in table.effect_rows() if r.degenerate]

    tests = inference.effect_tests(table, effects, vd, alpha)
    domain = inference.dominant_effects(tests, alpha)
    comparisons = inference.admissible_comparisons(domain, model, table, vd, alpha)

    vc = blups = h2 = stab = None
    if spec.kind in ("mixed", "met"):
        vc = mixed.estimate_components(table, vd)
        if vc.clamped:
            warnings.append(
                "negative variance component estimate(s) clamped to zero: "
                + ", ".join(vc.clamped))
        blups = mixed.blups(vc, model, vd)
    gxe_ctx = None
    if spec.kind == "met":
        g = spec.genotype_factor().name
        e = spec.environment_factor().name
        inter = f"{g} x {e}"
        interaction_significant = any(
            t.effect.name == inter and t.significant for t in tests)
        h2 = mixed.heritability(vc, vd.n_levels(e), vd.replicates, g, inter)
        matrix = _ge_matrix(model, vd)
        try:
            stab = stability.analyze_stability(matrix, interaction_significant)
        except AnalysisError as exc:
            warnings.append(f"stability analysis skipped: {exc.message}")
        gxe_ctx = decision.GxeContext(interaction_significant, stab)

    diag = diagnostics.run_diagnostics(model, vd, alpha_v, vc)
    rec = decision.decide(domain, comparisons, blups, gxe_ctx, diag, alpha,
                          minimize=minimize)
    return AnalysisResult(
        design=vd, effects=effects, model=model, anova=table, tests=tests,
        domain=domain, comparisons=comparisons, diagnostics=diag,
        variance_components=vc, blups=blups, heritability=h2, stability=stab,
        recommendation=rec, data=data, warnings=tuple(warnings))


def analyze_grouped(spec: DesignSpec, data: Dataset,
                    group_factors: tuple[str, ...] | None = None,
                    alpha: float | None = None, alpha_v: float | None = None,
                    minimize: bool = False) -> GroupedAnalysisResult:
    """Partition by the group factors and analyze each subset independently.

    Subset failures are captured per key; siblings keep running.
    """
    groups = spec.group_factors if group_factors is None else tuple(group_factors)
    part = partition(data, groups)
    outcomes: dict[tuple[str, ...], GroupOutcome] = {}
    for key, subset in part.items():
        try:
            result = analyze(spec, subset, alpha=alpha, alpha_v=alpha_v,
                             minimize=minimize)
            outcomes[key] = GroupOutcome(result=result)
        except AnalysisError as exc:
            outcomes[key] = GroupOutcome(error=exc)
    return GroupedAnalysisResult(part.group_factors, part.keys, outcomes)


def _ge_matrix(model: FittedModel, vd: ValidatedDesign) -> stability.GeMatrix:
    spec = vd.spec
    g = spec.genotype_factor().name
    e = spec.environment_factor().name
    g_levels = vd.levels[g]
    e_levels = vd.levels[e]
    vals = np.zeros((len(g_levels), len(e_levels)))
    means = model.marginal_means[(g, e)] if (g, e) in model.marginal_means else None
    if means is None:
        means = {(ge[1], ge[0]): v for ge, v in model.marginal_means[(e, g)].items()}
    for i, gl in enumerate(g_levels):
        for j, el in enumerate(e_levels):
            vals[i, j] = means[(gl, el)]
    return stability.GeMatrix(vals, g_levels, e_levels)
