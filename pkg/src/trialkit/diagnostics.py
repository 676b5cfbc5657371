"""Assumption checks per error stratum and the overall validity verdict.

Normality uses the Shapiro-Wilk W with the published polynomial coefficient
approximation and normalizing transform (the classic algorithm-R94 family,
reimplemented here). Variance homogeneity uses the median-centered Levene
(Brown-Forsythe) F. Violations never stop an analysis; they flip the
validity flag that conditions every downstream conclusion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import dist
from .design import ValidatedDesign
from .engine import FittedModel
from .errors import (InsufficientGroups, SampleTooLarge, SampleTooSmall,
                     ZeroVariance)

_MIN_P = 1e-300


@dataclass(frozen=True)
class StratumDiagnostics:
    stratum: str
    shapiro_w: float
    shapiro_p: float
    levene_f: float | None
    levene_p: float | None
    normality_ok: bool
    homogeneity_ok: bool
    note: str = ""


@dataclass(frozen=True)
class DiagnosticReport:
    entries: tuple[StratumDiagnostics, ...]
    alpha_v: float
    overall_valid: bool

    def failures(self) -> list[str]:
        msgs = []
        for e in self.entries:
            if not e.normality_ok:
                msgs.append(f"normality rejected in stratum '{e.stratum}' "
                            f"(Shapiro-Wilk p={e.shapiro_p:.4g} <= {self.alpha_v:g})")
            if not e.homogeneity_ok:
                msgs.append(f"variance homogeneity rejected in stratum '{e.stratum}' "
                            f"(Levene p={e.levene_p:.4g} <= {self.alpha_v:g})")
        return msgs


def residuals_by_stratum(model: FittedModel, design: ValidatedDesign,
                         variance_components=None) -> dict[str, np.ndarray]:
    """Residual vector for every error stratum of the design.

    Split plots contribute the whole-plot deviations (one per whole plot) as
    their own stratum next to the subplot residuals. For the mixed kind the
    single stratum holds conditional residuals: the data minus fixed effects
    and the *shrunken* block effects.
    """
    spec = design.spec
    if spec.kind == "split_plot":
        b = spec.block_factor.name
        wp = spec.whole_plot_factor().name
        wp_dev = model.deviations_vector((b, wp))
        return {
            "whole_plot": wp_dev,
            "residual": model.residuals.copy(),
        }
    if spec.kind == "mixed" and variance_components is not None:
        b = spec.block_factor.name
        t = design.n_rows // design.n_levels(b)
        sigma_b = variance_components.components[b]
        sigma_e = variance_components.components["Residual"]
        total = sigma_b + sigma_e / t
        lam = 0.0 if total == 0.0 else sigma_b / total
        block_dev = model.deviations_vector((b,))
        conditional = (model.residuals
                       + (1.0 - lam) * block_dev[model.codes[b]])
        return {"residual": conditional}
    return {"residual": model.residuals.copy()}


def _shapiro_weights(n: int) -> np.ndarray:
    m = np.array([dist.normal_quantile((i - 0.375) / (n + 0.25))
                  for i in range(1, n + 1)])
    ssq = float((m ** 2).sum())
    if n == 3:
        a = np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])
        return a
    rsn = 1.0 / math.sqrt(n)
    c = m / math.sqrt(ssq)
    a_n = (c[-1] + 0.221157 * rsn - 0.147981 * rsn ** 2 - 2.071190 * rsn ** 3
           + 4.434685 * rsn ** 4 - 2.706056 * rsn ** 5)
    a = np.empty(n)
    if n <= 5:
        phi = (ssq - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n ** 2)
        a[1:-1] = m[1:-1] / math.sqrt(phi)
        a[-1] = a_n
        a[0] = -a_n
    else:
        a_n1 = (c[-2] + 0.042981 * rsn - 0.293762 * rsn ** 2 - 1.752461 * rsn ** 3
                + 5.682633 * rsn ** 4 - 3.582633 * rsn ** 5)
        phi = ((ssq - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2)
               / (1.0 - 2.0 * a_n ** 2 - 2.0 * a_n1 ** 2))
        a[2:-2] = m[2:-2] / math.sqrt(phi)
        a[-1] = a_n
        a[-2] = a_n1
        a[0] = -a_n
        a[1] = -a_n1
    return a


def shapiro_wilk(x) -> tuple[float, float]:
    """Shapiro-Wilk normality test; returns (W, p).

    Valid for 3 <= n <= 5000. p comes from the normalizing transform of W:
    arcsin form at n = 3, log-normal in (1 - W) above, with the published
    polynomial mean/spread curves.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        raise SampleTooSmall("Shapiro-Wilk requires at least 3 observations", n=n)
    if n > 5000:
        raise SampleTooLarge("Shapiro-Wilk supports at most 5000 observations", n=n)
    xs = np.sort(x)
    ssd = float(((xs - xs.mean()) ** 2).sum())
    if ssd == 0.0:
        raise ZeroVariance("sample has zero variance")
    a = _shapiro_weights(n)
    w = float((a @ xs) ** 2 / ssd)
    w = min(w, 1.0)

    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(1.0, max(0.0, p))
        return w, max(p, _MIN_P)
    if n <= 11:
        g = -2.273 + 0.459 * n
        mu = 0.5440 - 0.39978 * n + 0.025054 * n ** 2 - 0.0006714 * n ** 3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n ** 2
                         - 0.0020322 * n ** 3)
        arg = g - math.log(1.0 - w)
        if arg <= 0.0:
            return w, _MIN_P
        z = (-math.log(arg) - mu) / sigma
    else:
        ln_n = math.log(n)
        mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n ** 2 + 0.0038915 * ln_n ** 3
        sigma = math.exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n ** 2)
        z = (math.log(1.0 - w) - mu) / sigma
    return w, max(dist.normal_sf(z), _MIN_P)


def levene(groups: dict[str, np.ndarray]) -> tuple[float, float]:
    """Median-centered Levene (Brown-Forsythe) homogeneity test.

    One-way F on absolute deviations from the group medians; requires at
    least two groups with two observations each.
    """
    if len(groups) < 2:
        raise InsufficientGroups("Levene test requires at least 2 groups",
                                 n_groups=len(groups))
    for label, values in groups.items():
        if np.asarray(values).size < 2:
            raise InsufficientGroups(
                f"group '{label}' has fewer than 2 observations", group=label)
    z_groups = [np.abs(np.asarray(v, dtype=float)
                       - np.median(np.asarray(v, dtype=float)))
                for v in groups.values()]
    all_z = np.concatenate(z_groups)
    k = len(z_groups)
    n_total = all_z.size
    grand = all_z.mean()
    ss_between = sum(z.size * (z.mean() - grand) ** 2 for z in z_groups)
    ss_within = sum(((z - z.mean()) ** 2).sum() for z in z_groups)
    df1, df2 = k - 1, n_total - k
    if ss_within == 0.0:
        if ss_between == 0.0:
            return 0.0, 1.0
        return float("inf"), 0.0
    f = float((ss_between / df1) / (ss_within / df2))
    return f, dist.f_sf(f, df1, df2)


def validity(stratum_tests: dict[str, dict], alpha_v: float) -> DiagnosticReport:
    """Fold per-stratum test results into the validity predicate.

    Each entry of `stratum_tests` maps a stratum label to a dict with keys
    shapiro (w, p), levene ((f, p) or None) and an optional note. A stratum
    passes when neither test rejects at alpha_v; the report is valid only if
    every stratum passes.
    """
    entries = []
    for stratum, res in stratum_tests.items():
        w, p_sw = res["shapiro"]
        lev = res.get("levene")
        f_lev, p_lev = (lev if lev is not None else (None, None))
        normality_ok = p_sw > alpha_v
        homogeneity_ok = True if p_lev is None else p_lev > alpha_v
        entries.append(StratumDiagnostics(
            stratum, w, p_sw, f_lev, p_lev, normality_ok, homogeneity_ok,
            res.get("note", "")))
    overall = all(e.normality_ok and e.homogeneity_ok for e in entries)
    return DiagnosticReport(tuple(entries), alpha_v, overall)


def run_diagnostics(model: FittedModel, design: ValidatedDesign, alpha_v: float,
                    variance_components=None) -> DiagnosticReport:
    """Compute both tests for every stratum and fold into a report.

    Homogeneity groups residuals by the treatment-combination cells observed
    at the stratum (whole-plot factor levels for the whole-plot stratum).
    Degenerate strata (zero variance, groups too small) are recorded as
    passing with a note, since nothing can be rejected.
    """
    strata = residuals_by_stratum(model, design, variance_components)
    results: dict[str, dict] = {}
    for label, resid in strata.items():
        note = ""
        try:
            sw = shapiro_wilk(resid)
        except ZeroVariance:
            sw = (1.0, 1.0)
            note = "zero residual variance; normality not testable"
        groups = _homogeneity_groups(label, resid, model, design)
        lev = None
        if groups is not None:
            try:
                lev = levene(groups)
            except InsufficientGroups:
                note = (note + "; " if note else "") + "too few observations per group"
        results[label] = {"shapiro": sw, "levene": lev, "note": note}
    return validity(results, alpha_v)


def _homogeneity_groups(stratum: str, resid: np.ndarray, model: FittedModel,
                        design: ValidatedDesign) -> dict[str, np.ndarray] | None:
    spec = design.spec
    if stratum == "whole_plot":
        wp = spec.whole_plot_factor().name
        n_b = design.n_levels(spec.block_factor.name)
        n_wp = design.n_levels(wp)
        # whole-plot deviations are ordered block-major
        dev = resid.reshape(n_b, n_wp)
        return {design.levels[wp][i]: dev[:, i] for i in range(n_wp)}
    factors = spec.treatment_names()
    cells = design.n_rows
    for f in factors:
        cells //= design.n_levels(f)
    if cells < 3 and len(factors) > 1:
        # median-centered deviations are uninformative in 2-observation
        # cells; fall back to the primary treatment factor
        factors = factors[:1]
    codes = model.codes
    keys = {}
    combos = list(itertools.product(*(range(design.n_levels(f)) for f in factors)))
    labels = list(itertools.product(*(design.levels[f] for f in factors)))
    stacked = np.stack([codes[f] for f in factors])
    for combo, label in zip(combos, labels):
        mask = np.all(stacked == np.array(combo)[:, None], axis=0)
        keys[":".join(label)] = resid[mask]
    return keys
