"""Hierarchical interpretation and Tukey HSD mean separation.

The interpretation domain is decided by the highest-order significant
treatment effect: a significant interaction retracts its constituent main
effects from interpretation, and post-hoc comparisons are generated only
inside the admissible domain. Letters encoding the pairwise outcome use the
insert-and-absorb construction over the non-significance graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from string import ascii_lowercase

from . import dist
from .design import RESIDUAL, Effect, EffectSet, ValidatedDesign
from .engine import AnovaTable, FittedModel

SUBSUMED = "subsumed_by_interaction"
NOT_SIGNIFICANT = "not_significant"

MODE_MAIN = "main_effects"
MODE_INTERACTION = "interaction_combinations"
MODE_NONE = "none"


@dataclass(frozen=True)
class EffectTest:
    effect: Effect
    f: float
    p: float
    significant: bool


@dataclass(frozen=True)
class AdmissibleDomain:
    dominant: tuple[Effect, ...]
    excluded: tuple[tuple[Effect, str], ...]
    mode: str


@dataclass(frozen=True)
class MeanEntry:
    label: str
    mean: float
    n: int


@dataclass(frozen=True)
class PairResult:
    a: str
    b: str
    difference: float
    hsd_threshold: float
    significant: bool


@dataclass(frozen=True)
class ComparisonSet:
    target: str
    means: tuple[MeanEntry, ...]  # descending by mean
    mse: float
    df_error: int
    pairs: tuple[PairResult, ...]
    letters: dict[str, str]
    alpha: float
    conservative: bool = False
    note: str = ""
    degenerate: bool = False


def effect_tests(anova: AnovaTable, effects: EffectSet,
                 design: ValidatedDesign, alpha: float) -> tuple[EffectTest, ...]:
    """Hypothesis-test records for the treatment effects only.

    Block terms and error-stratum defining terms are not interpretation
    candidates.
    """
    treatment = set(design.spec.treatment_names())
    out = []
    for row in anova.effect_rows():
        if not set(row.factors) <= treatment:
            continue
        eff = effects.effect(row.factors)
        p = row.p if row.p is not None else 1.0
        out.append(EffectTest(eff, row.f, p, p <= alpha))
    return tuple(out)


def dominant_effects(tests: tuple[EffectTest, ...], alpha: float) -> AdmissibleDomain:
    """Dominant-effect set: all significant effects of maximal order.

    Significance is re-derived from p <= alpha so the operation is monotone
    in alpha regardless of how the tests were produced.
    """
    significant = [t for t in tests if t.p <= alpha]
    if not significant:
        excluded = tuple((t.effect, NOT_SIGNIFICANT) for t in tests)
        return AdmissibleDomain((), excluded, MODE_NONE)
    max_order = max(t.effect.order for t in significant)
    dominant = tuple(t.effect for t in significant if t.effect.order == max_order)
    excluded = []
    for t in tests:
        if t.effect in dominant:
            continue
        excluded.append((t.effect, NOT_SIGNIFICANT if t.p > alpha else SUBSUMED))
    mode = MODE_INTERACTION if max_order >= 2 else MODE_MAIN
    return AdmissibleDomain(dominant, tuple(excluded), mode)


def _compact_letters(labels: list[str],
                     ns_pairs: set[frozenset[str]]) -> dict[str, str]:
    # Insert-and-absorb over the non-significance graph. `labels` arrive in
    # descending-mean order; columns are lettered by their best member.
    columns: list[set[str]] = [set(labels)]
    order = {lab: i for i, lab in enumerate(labels)}
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            a, b = labels[i], labels[j]
            if frozenset((a, b)) in ns_pairs:
                continue
            new_cols: list[set[str]] = []
            for col in columns:
                if a in col and b in col:
                    new_cols.append(col - {a})
                    new_cols.append(col - {b})
                else:
                    new_cols.append(col)
            # absorb: drop columns contained in another column
            keep: list[set[str]] = []
            for col in new_cols:
                if not col:
                    continue
                if any(col < other for other in new_cols if other != col):
                    continue
                if col in keep:
                    continue
                keep.append(col)
            columns = keep
    columns.sort(key=lambda col: min(order[lab] for lab in col))
    letters = {lab: "" for lab in labels}
    for letter, col in zip(ascii_lowercase, columns):
        for lab in col:
            letters[lab] += letter
    return letters


def tukey_hsd(means: dict[str, float], n: int, mse: float, df_error: int,
              alpha: float, target: str = "", conservative: bool = False,
              note: str = "") -> ComparisonSet:
    """All-pairs Tukey comparison of equally replicated level means.

    HSD = q(alpha, k, df) * sqrt(mse / n); a pair differs when the absolute
    mean difference exceeds it. With mse = 0 every unequal pair is declared
    different and the set is flagged degenerate.
    """
    entries = sorted((MeanEntry(lab, m, n) for lab, m in means.items()),
                     key=lambda e: (-e.mean, e.label))
    labels = [e.label for e in entries]
    by_label = {e.label: e.mean for e in entries}
    degenerate = mse == 0.0 or df_error <= 0
    if degenerate:
        hsd = 0.0
    else:
        q = dist.studentized_range_quantile(alpha, len(labels), df_error)
        hsd = q * (mse / n) ** 0.5
    pairs = []
    ns_pairs: set[frozenset[str]] = set()
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            a, b = labels[i], labels[j]
            diff = by_label[a] - by_label[b]
            sig = abs(diff) > hsd
            if not sig:
                ns_pairs.add(frozenset((a, b)))
            pairs.append(PairResult(a, b, diff, hsd, sig))
    letters = _compact_letters(labels, ns_pairs)
    return ComparisonSet(target or "levels", tuple(entries), mse, df_error,
                         tuple(pairs), letters, alpha, conservative, note,
                         degenerate)


def _combo_label(levels: tuple[str, ...]) -> str:
    return ":".join(levels)


def _stratum_for(effect: Effect, anova: AnovaTable) -> tuple[float, int]:
    return anova.stratum_ms[effect.denominator], anova.stratum_df[effect.denominator]


def _conservative_stratum(anova: AnovaTable) -> tuple[float, int]:
    # Largest error mean square across strata, with that stratum's df.
    label = max(anova.stratum_ms, key=lambda k: (anova.stratum_ms[k], k))
    return anova.stratum_ms[label], anova.stratum_df[label]


def admissible_comparisons(domain: AdmissibleDomain, model: FittedModel,
                           anova: AnovaTable, design: ValidatedDesign,
                           alpha: float) -> list[ComparisonSet]:
    """Comparison sets for the admissible domain only.

    Main-effect dominance yields one marginal set per dominant effect;
    interaction dominance yields the full combination set plus the simple
    effects of each constituent factor. Comparisons that cross the
    whole-plot stratum use the larger error mean square and are flagged
    conservative.
    """
    if domain.mode == MODE_NONE:
        return []
    n_rows = design.n_rows
    multi_stratum = len(anova.stratum_ms) > 1
    sets: list[ComparisonSet] = []

    for eff in domain.dominant:
        if eff.order == 1:
            name = eff.factors[0]
            means = {lv: m for (lv,), m in model.marginal_means[eff.factors].items()}
            mse, df = _stratum_for(eff, anova)
            n = n_rows // design.n_levels(name)
            sets.append(tukey_hsd(means, n, mse, df, alpha, target=name))
            continue

        cells = model.marginal_means[eff.factors]
        n_cell = n_rows
        for f in eff.factors:
            n_cell //= design.n_levels(f)
        full_means = {_combo_label(k): m for k, m in cells.items()}
        if multi_stratum:
            mse, df = _conservative_stratum(anova)
            sets.append(tukey_hsd(
                full_means, n_cell, mse, df, alpha,
                target=" x ".join(eff.factors), conservative=True,
                note="comparisons span error strata; larger mean square used"))
        else:
            mse, df = _stratum_for(eff, anova)
            sets.append(tukey_hsd(full_means, n_cell, mse, df, alpha,
                                  target=" x ".join(eff.factors)))

        wp_name = None
        if design.spec.kind == "split_plot":
            wp_name = design.spec.whole_plot_factor().name
        for pos, f in enumerate(eff.factors):
            others = tuple(x for i, x in enumerate(eff.factors) if i != pos)
            other_levels = [design.levels[o] for o in others]
            for fixed in itertools.product(*other_levels):
                means = {}
                for key, m in cells.items():
                    key_others = tuple(v for i, v in enumerate(key) if i != pos)
                    if key_others == fixed:
                        means[key[pos]] = m
                ctx = ", ".join(f"{o}={v}" for o, v in zip(others, fixed))
                crosses_wp = multi_stratum and f == wp_name
                if crosses_wp:
                    mse, df = _conservative_stratum(anova)
                    sets.append(tukey_hsd(
                        means, n_cell, mse, df, alpha,
                        target=f"{f} within {ctx}", conservative=True,
                        note="whole-plot levels compared within a subplot level; "
                             "larger mean square used"))
                else:
                    mse, df = anova.stratum_ms[RESIDUAL], anova.stratum_df[RESIDUAL]
                    sets.append(tukey_hsd(means, n_cell, mse, df, alpha,
                                          target=f"{f} within {ctx}"))
    return sets
