"""Decision layer: turn admissible comparisons into a recommendation.

The output names the set of statistically equivalent best treatments (never
a bare numerical maximum), states the scope the ranking is valid in, and
carries the diagnostic caveats forward. Narratives are assembled from fixed
templates keyed on (scope, ranking basis) so identical inputs produce
byte-identical text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import DiagnosticReport
from .inference import MODE_INTERACTION, MODE_NONE, AdmissibleDomain, ComparisonSet
from .mixed import BlupTable
from .stability import WIDE_ADAPTATION, StabilityResult

SCOPE_GLOBAL = "global"
SCOPE_PER_ENVIRONMENT = "per_environment"
SCOPE_PER_COMBINATION = "per_combination"
SCOPE_NONE = "none"

BASIS_MARGINAL = "marginal_means"
BASIS_CELL = "cell_means"
BASIS_PREDICTED = "predicted_means"


@dataclass(frozen=True)
class Recommendation:
    scope: str
    top_group: tuple[str, ...]
    ranking_basis: str
    validity_caveats: tuple[str, ...]
    narrative: str


@dataclass(frozen=True)
class GxeContext:
    interaction_significant: bool
    stability: StabilityResult | None


def _extreme_clique(cs: ComparisonSet, minimize: bool) -> tuple[str, ...]:
    """Labels statistically equivalent to the best mean of a comparison set."""
    best = cs.means[-1] if minimize else cs.means[0]
    best_letters = set(cs.letters[best.label])
    group = [e.label for e in cs.means if set(cs.letters[e.label]) & best_letters]
    return tuple(sorted(group, key=lambda lab: [e.label for e in cs.means].index(lab)))


def _find_set(comparisons: list[ComparisonSet], target: str) -> ComparisonSet | None:
    for cs in comparisons:
        if cs.target == target:
            return cs
    return None


def _caveat_sentence(caveats) -> str:
    if not caveats:
        return ""
    return (" Conclusions are conditional on model validity: "
            + "; ".join(caveats) + ".")


def decide(domain: AdmissibleDomain, comparisons: list[ComparisonSet],
           blups: BlupTable | None, gxe: GxeContext | None,
           diagnostics: DiagnosticReport, alpha: float,
           minimize: bool = False) -> Recommendation:
    """Decision function over one analysis' admissible results.

    Fixed-effect path: the top group is every label sharing a letter with
    the extreme mean of the dominant comparison set. Interaction dominance
    restricts scope to combinations. When random factors drive the ranking
    (mixed/met), predicted means take over as the basis; a significant
    genotype-by-environment interaction narrows scope to per-environment.
    """
    caveats = tuple(diagnostics.failures())
    direction = "lowest" if minimize else "highest"

    if domain.mode == MODE_NONE:
        narrative = (f"No treatment effects were statistically significant "
                     f"at alpha={alpha:g}; no recommendation is made."
                     + _caveat_sentence(caveats))
        return Recommendation(SCOPE_NONE, (), BASIS_MARGINAL, caveats, narrative)

    if gxe is not None:
        if gxe.interaction_significant:
            env_sets = [cs for cs in comparisons if " within " in cs.target]
            pieces = []
            for cs in env_sets:
                factor, ctx = cs.target.split(" within ", 1)
                top = _extreme_clique(cs, minimize)
                pieces.append(f"{ctx}: {', '.join(top)}")
            combo = next((cs for cs in comparisons if " x " in cs.target), None)
            top_group = _extreme_clique(combo, minimize) if combo else ()
            narrative = (
                "The genotype-by-environment interaction is significant; "
                "rankings are environment-specific. "
                f"Per-environment {direction}-performing groups: "
                + "; ".join(pieces) + "." + _caveat_sentence(caveats))
            return Recommendation(SCOPE_PER_ENVIRONMENT, top_group, BASIS_CELL,
                                  caveats, narrative)
        target_set = _find_set(comparisons, blups.target) if blups else None
        if blups is not None and target_set is not None:
            clique = _extreme_clique(target_set, minimize)
            ordered = [e.level for e in blups.entries]
            if minimize:
                ordered = ordered[::-1]
            top_group = tuple(lab for lab in ordered if lab in clique)
            framing = ""
            if gxe.stability is not None and gxe.stability.framing == WIDE_ADAPTATION:
                framing = (" Stability analysis confirms wide adaptation, so a "
                           "single recommendation holds across environments.")
            narrative = (
                "The genotype-by-environment interaction is not significant; "
                "ranking by predicted means is valid across environments. "
                f"{direction.capitalize()}-ranked group: {', '.join(top_group)} "
                f"(shrinkage factor {blups.shrinkage:.5f})." + framing
                + _caveat_sentence(caveats))
            return Recommendation(SCOPE_GLOBAL, top_group, BASIS_PREDICTED,
                                  caveats, narrative)

    if blups is not None:
        target_set = _find_set(comparisons, blups.target)
        ordered = [e.level for e in blups.entries]
        if minimize:
            ordered = ordered[::-1]
        if target_set is not None:
            clique = set(_extreme_clique(target_set, minimize))
            top_group = tuple(lab for lab in ordered if lab in clique)
        else:
            top_group = (ordered[0],)
        narrative = (
            "Random environmental variation was modeled; treatments are "
            "ranked by predicted rather than observed means. "
            f"{direction.capitalize()}-predicted group: {', '.join(top_group)} "
            f"(shrinkage factor {blups.shrinkage:.5f})."
            + _caveat_sentence(caveats))
        return Recommendation(SCOPE_GLOBAL, top_group, BASIS_PREDICTED,
                              caveats, narrative)

    if domain.mode == MODE_INTERACTION:
        combo = comparisons[0]
        top_group = _extreme_clique(combo, minimize)
        narrative = (
            f"The interaction {combo.target} is dominant; marginal means are "
            "not interpreted and rankings are conditional on factor "
            f"combinations. {direction.capitalize()}-performing "
            f"combination(s): {', '.join(top_group)}."
            + _caveat_sentence(caveats))
        return Recommendation(SCOPE_PER_COMBINATION, top_group, BASIS_CELL,
                              caveats, narrative)

    # fixed-effect main-effect path
    main_sets = [cs for cs in comparisons if " within " not in cs.target]
    if len(main_sets) == 1:
        cs = main_sets[0]
        top_group = _extreme_clique(cs, minimize)
        narrative = (
            f"{direction.capitalize()}-performing {cs.target} group: "
            f"{', '.join(top_group)} (statistically equivalent at "
            f"alpha={alpha:g}, Tukey HSD)." + _caveat_sentence(caveats))
        return Recommendation(SCOPE_GLOBAL, top_group, BASIS_MARGINAL,
                              caveats, narrative)

    cliques = {cs.target: _extreme_clique(cs, minimize) for cs in main_sets}
    combos: list[str] = [""]
    for cs in main_sets:
        combos = [f"{prefix}:{lab}" if prefix else lab
                  for prefix in combos for lab in cliques[cs.target]]
    per_factor = "; ".join(
        f"{cs.target}: {', '.join(cliques[cs.target])}" for cs in main_sets)
    narrative = (
        "No interaction is dominant, so main effects are interpreted "
        f"independently. {direction.capitalize()}-performing levels per "
        f"factor: {per_factor}. Combined recommendation: "
        f"{', '.join(combos)}." + _caveat_sentence(caveats))
    return Recommendation(SCOPE_GLOBAL, tuple(combos), BASIS_MARGINAL,
                          caveats, narrative)
