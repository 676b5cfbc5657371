"""Balanced fixed-effect fitting and multi-stratum ANOVA assembly.

Estimation uses the closed-form decomposition available under balance: the
deviation attached to an effect is the alternating (inclusion-exclusion) sum
of marginal means over its factor subsets, which is identical to the
least-squares solution under sum-to-zero coding. Sums of squares are the
replication-weighted squared deviations, so effect SS plus residual SS
reproduces the total corrected SS exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import dist
from .data import Dataset, GroupPartition
from .design import (RESIDUAL, EffectSet, ValidatedDesign, compile_effects,
                     validate_against_data)
from .errors import AnalysisError, UnbalancedDesign


@dataclass(frozen=True)
class FittedModel:
    grand_mean: float
    # per effect (tuple of factor names): level-combination -> value
    effect_deviations: dict[tuple[str, ...], dict[tuple[str, ...], float]]
    marginal_means: dict[tuple[str, ...], dict[tuple[str, ...], float]]
    cell_means: dict[tuple[str, ...], float]  # over all treatment factors
    residuals: np.ndarray
    fitted: np.ndarray
    response: np.ndarray
    codes: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def deviations_vector(self, factors: tuple[str, ...]) -> np.ndarray:
        dev = self.effect_deviations[factors]
        return np.array(list(dev.values()))


@dataclass(frozen=True)
class AnovaRow:
    source: str
    factors: tuple[str, ...] | None  # None for the residual row
    df: int
    ss: float
    ms: float
    f: float | None = None
    p: float | None = None
    denominator: str | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple[AnovaRow, ...]
    stratum_ms: dict[str, float]
    stratum_df: dict[str, int]

    def row(self, source: str) -> AnovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    def effect_rows(self) -> tuple[AnovaRow, ...]:
        return tuple(r for r in self.rows if r.factors is not None)

    @property
    def residual(self) -> AnovaRow:
        return self.rows[-1]

    @property
    def total_df(self) -> int:
        return sum(r.df for r in self.rows)

    @property
    def total_ss(self) -> float:
        return float(sum(r.ss for r in self.rows))


def _group_means(y: np.ndarray, idx: np.ndarray, n_cells: int) -> np.ndarray:
    counts = np.bincount(idx, minlength=n_cells)
    sums = np.bincount(idx, weights=y, minlength=n_cells)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return means


class _Decomposer:
    """Shared mean-decomposition machinery over one balanced dataset."""

    def __init__(self, design: ValidatedDesign, data: Dataset):
        self.design = design
        spec = design.spec
        self.y = data.numeric(spec.response)
        self.levels = design.levels
        self.codes: dict[str, np.ndarray] = {}
        for name in spec.factor_names():
            lookup = {lv: i for i, lv in enumerate(self.levels[name])}
            self.codes[name] = np.array([lookup[v] for v in data.column(name)],
                                        dtype=int)
        self.grand_mean = float(self.y.mean())
        self._marginal_cache: dict[tuple[str, ...], np.ndarray] = {}

    def shape(self, factors: tuple[str, ...]) -> tuple[int, ...]:
        return tuple(len(self.levels[f]) for f in factors)

    def cell_index(self, factors: tuple[str, ...]) -> np.ndarray:
        shape = self.shape(factors)
        return np.ravel_multi_index([self.codes[f] for f in factors], shape)

    def marginal_means(self, factors: tuple[str, ...]) -> np.ndarray:
        """Mean per level combination of `factors`, flattened row-major."""
        if factors not in self._marginal_cache:
            shape = self.shape(factors)
            n_cells = int(np.prod(shape))
            idx = self.cell_index(factors)
            self._marginal_cache[factors] = _group_means(self.y, idx, n_cells)
        return self._marginal_cache[factors]

    def deviations(self, factors: tuple[str, ...]) -> np.ndarray:
        """Sum-to-zero effect deviations via inclusion-exclusion."""
        shape = self.shape(factors)
        dev = np.zeros(shape)
        k = len(factors)
        for size in range(0, k + 1):
            for combo in itertools.combinations(range(k), size):
                sign = 1.0 if (k - size) % 2 == 0 else -1.0
                if size == 0:
                    dev += sign * self.grand_mean
                    continue
                sub = tuple(factors[i] for i in combo)
                m = self.marginal_means(sub).reshape(self.shape(sub))
                expand = [slice(None) if i in combo else None for i in range(k)]
                dev += sign * m[tuple(expand)]
        return dev

    def level_keys(self, factors: tuple[str, ...]):
        return list(itertools.product(*(self.levels[f] for f in factors)))


def fit(design: ValidatedDesign, data: Dataset) -> FittedModel:
    """Closed-form balanced-design estimates for the compiled model.

    Defensively re-checks balance; the deviations of every modeled effect
    sum to zero over each of their indices, and fitted + residual equals the
    observed response row by row.
    """
    revalidated = validate_against_data(design.spec, data)
    if revalidated.replicates != design.replicates:
        raise UnbalancedDesign("dataset does not match the validated design")
    dec = _Decomposer(design, data)
    effects = compile_effects(design.spec)

    effect_deviations = {}
    marginal_means = {}
    fitted = np.full_like(dec.y, dec.grand_mean)
    for eff in effects.effects:
        dev = dec.deviations(eff.factors)
        flat = dev.ravel()
        keys = dec.level_keys(eff.factors)
        effect_deviations[eff.factors] = dict(zip(keys, flat.tolist()))
        marginal_means[eff.factors] = dict(
            zip(keys, dec.marginal_means(eff.factors).tolist()))
        fitted = fitted + flat[dec.cell_index(eff.factors)]

    residuals = dec.y - fitted
    treat = design.spec.treatment_names()
    cell_means = dict(zip(dec.level_keys(treat),
                          dec.marginal_means(treat).tolist()))
    return FittedModel(
        grand_mean=dec.grand_mean,
        effect_deviations=effect_deviations,
        marginal_means=marginal_means,
        cell_means=cell_means,
        residuals=residuals,
        fitted=fitted,
        response=dec.y,
        codes=dec.codes,
    )


def _effect_df(design: ValidatedDesign, factors: tuple[str, ...]) -> int:
    df = 1
    for f in factors:
        df *= design.n_levels(f) - 1
    return df


def anova(design: ValidatedDesign, model: FittedModel,
          effects: EffectSet | None = None) -> AnovaTable:
    """Assemble the multi-stratum ANOVA table for a fitted model.

    Each effect's F uses the denominator stratum recorded at compile time.
    A zero denominator mean square is reported as a degenerate row (F = inf,
    p = 0) rather than raising.
    """
    if effects is None:
        effects = compile_effects(design.spec)
    n = design.n_rows

    partial = []
    df_total = 0
    for eff in effects.effects:
        dev = model.deviations_vector(eff.factors)
        per_cell = n // dev.size
        ss = float(per_cell * (dev ** 2).sum())
        df = _effect_df(design, eff.factors)
        df_total += df
        partial.append((eff, df, ss))

    df_res = n - 1 - df_total
    ss_res = float((model.residuals ** 2).sum())
    ms_res = ss_res / df_res if df_res > 0 else 0.0

    stratum_ms = {RESIDUAL: ms_res}
    stratum_df = {RESIDUAL: df_res}
    for stratum in effects.strata:
        if stratum.defining_factors is None:
            continue
        for eff, df, ss in partial:
            if eff.factors == stratum.defining_factors:
                stratum_ms[stratum.label] = ss / df
                stratum_df[stratum.label] = df

    rows = []
    for eff, df, ss in partial:
        ms = ss / df
        den_ms = stratum_ms[eff.denominator]
        den_df = stratum_df[eff.denominator]
        if den_ms == 0.0 or den_df <= 0:
            f_stat, p, degenerate = float("inf"), 0.0, True
        else:
            f_stat = ms / den_ms
            p = dist.f_sf(f_stat, df, den_df)
            degenerate = False
        rows.append(AnovaRow(eff.name, eff.factors, df, ss, ms,
                             f_stat, p, eff.denominator, degenerate))
    rows.append(AnovaRow("Residual", None, df_res, ss_res, ms_res))
    return AnovaTable(tuple(rows), stratum_ms, stratum_df)


@dataclass(frozen=True)
class GroupOutcome:
    """Result of analyzing one partition subset; exactly one field is set."""

    result: object | None = None
    error: AnalysisError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def grouped_analyze(design: ValidatedDesign, partition: GroupPartition) -> dict:
    """Apply the full analysis pipeline to every partition subset.

    Output keys follow partition order. A failing subset contributes its
    structured error without aborting the siblings.
    """
    from . import pipeline  # deferred: pipeline depends on this module

    outcomes: dict[tuple[str, ...], GroupOutcome] = {}
    for key, subset in partition.items():
        try:
            outcomes[key] = GroupOutcome(result=pipeline.analyze(design.spec, subset))
        except AnalysisError as exc:
            outcomes[key] = GroupOutcome(error=exc)
    return outcomes
