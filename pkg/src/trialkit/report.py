"""Table formatting, serialization, and deterministic report bundles.

Tables print with three decimals and p-values below 0.001 render as
"<0.001", matching conventional ANOVA reporting. A bundle is assembled
completely in memory, then written file by file in manifest order; the
manifest records a sha256 per file so two runs can be compared byte for
byte.
"""

from __future__ import annotations

import hashlib
import io
import json
import os

from .decision import Recommendation
from .diagnostics import DiagnosticReport
from .engine import AnovaTable
from .inference import ComparisonSet
from .mixed import BlupTable, HeritabilityEstimate, VarianceComponents
from .pipeline import AnalysisResult, GroupedAnalysisResult
from .stability import StabilityResult


def fmt(value, decimals: int = 3) -> str:
    if value is None:
        return "--"
    if value == float("inf"):
        return "inf"
    return f"{value:.{decimals}f}"


def fmt_p(p) -> str:
    if p is None:
        return "--"
    if p < 0.001:
        return "<0.001"
    return f"{p:.3f}"


def anova_csv(table: AnovaTable) -> str:
    lines = ["source,df,ss,ms,f,p,denominator"]
    for r in table.rows:
        lines.append(",".join([
            r.source, str(r.df), fmt(r.ss), fmt(r.ms),
            fmt(r.f), fmt_p(r.p), r.denominator or "--",
        ]))
    return "\n".join(lines) + "\n"


def anova_text(table: AnovaTable) -> str:
    header = f"{'Source':<28}{'DF':>4}{'SS':>12}{'MS':>12}{'F':>12}{'p':>9}  {'Denominator'}"
    lines = [header, "-" * len(header)]
    for r in table.rows:
        note = " (degenerate)" if r.degenerate else ""
        lines.append(
            f"{r.source:<28}{r.df:>4}{fmt(r.ss):>12}{fmt(r.ms):>12}"
            f"{fmt(r.f):>12}{fmt_p(r.p):>9}  {r.denominator or '--'}{note}")
    return "\n".join(lines)


def comparisons_csv(comparisons: list[ComparisonSet]) -> str:
    lines = ["set,level,mean,n,letters"]
    for cs in comparisons:
        for e in cs.means:
            lines.append(f"{cs.target},{e.label},{fmt(e.mean)},{e.n},{cs.letters[e.label]}")
    return "\n".join(lines) + "\n"


def comparison_pairs_csv(comparisons: list[ComparisonSet]) -> str:
    lines = ["set,a,b,diff,hsd,significant"]
    for cs in comparisons:
        for p in cs.pairs:
            lines.append(f"{cs.target},{p.a},{p.b},{fmt(p.difference)},"
                         f"{fmt(p.hsd_threshold)},{str(p.significant).lower()}")
    return "\n".join(lines) + "\n"


def comparisons_text(comparisons: list[ComparisonSet]) -> str:
    if not comparisons:
        return "(no admissible comparisons)"
    blocks = []
    for cs in comparisons:
        head = (f"[{cs.target}]  mse={fmt(cs.mse)}  df={cs.df_error}  "
                f"alpha={cs.alpha:g}")
        if cs.conservative:
            head += "  [conservative]"
        lines = [head]
        if cs.note:
            lines.append(f"  note: {cs.note}")
        lines.append(f"  {'level':<20}{'mean':>10}{'n':>5}  letters")
        for e in cs.means:
            lines.append(f"  {e.label:<20}{fmt(e.mean):>10}{e.n:>5}  {cs.letters[e.label]}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def diagnostics_json(report: DiagnosticReport) -> str:
    doc = {
        "alpha_v": report.alpha_v,
        "overall_valid": report.overall_valid,
        "strata": [
            {
                "stratum": e.stratum,
                "shapiro_w": round(e.shapiro_w, 6),
                "shapiro_p": round(e.shapiro_p, 6),
                "levene_f": None if e.levene_f is None else round(e.levene_f, 6),
                "levene_p": None if e.levene_p is None else round(e.levene_p, 6),
                "normality_ok": e.normality_ok,
                "homogeneity_ok": e.homogeneity_ok,
                "note": e.note,
            }
            for e in report.entries
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def diagnostics_text(report: DiagnosticReport) -> str:
    lines = []
    for e in report.entries:
        lev = ("--" if e.levene_f is None
               else f"F={fmt(e.levene_f)} p={fmt_p(e.levene_p)}")
        lines.append(
            f"stratum {e.stratum}: Shapiro-Wilk W={fmt(e.shapiro_w)} "
            f"p={fmt_p(e.shapiro_p)} ({'ok' if e.normality_ok else 'violated'}); "
            f"Levene {lev} ({'ok' if e.homogeneity_ok else 'violated'})")
        if e.note:
            lines.append(f"  note: {e.note}")
    lines.append(f"overall: {'valid' if report.overall_valid else 'assumptions violated'} "
                 f"(alpha_v={report.alpha_v:g})")
    return "\n".join(lines)


def variance_components_csv(vc: VarianceComponents) -> str:
    lines = ["component,variance,clamped"]
    for term, value in vc.components.items():
        lines.append(f"{term},{fmt(value)},{str(term in vc.clamped).lower()}")
    return "\n".join(lines) + "\n"


def blup_csv(blups: BlupTable) -> str:
    lines = ["level,effect,predicted_mean"]
    for e in blups.entries:
        lines.append(f"{e.level},{fmt(e.effect)},{fmt(e.predicted_mean)}")
    return "\n".join(lines) + "\n"


def heritability_text(h2: HeritabilityEstimate) -> str:
    return (f"H2 = {fmt(h2.h2, 4)} (genotypic variance {fmt(h2.genotypic_variance)}, "
            f"interaction {fmt(h2.interaction_variance)}, residual "
            f"{fmt(h2.residual_variance)}; {h2.n_env} environments x "
            f"{h2.n_rep} replicates)")


def stability_files(stab: StabilityResult) -> dict[str, str]:
    files = {}
    m = stab.matrix
    buf = io.StringIO()
    buf.write("genotype," + ",".join(
        f"score{i+1}" for i in range(stab.ammi.singular_values.size)) + "\n")
    for i, g in enumerate(m.genotypes):
        buf.write(g + "," + ",".join(fmt(v) for v in stab.ammi.genotype_scores[i]) + "\n")
    buf.write("environment," + ",".join(
        f"score{i+1}" for i in range(stab.ammi.singular_values.size)) + "\n")
    for j, e in enumerate(m.environments):
        buf.write(e + "," + ",".join(fmt(v) for v in stab.ammi.environment_scores[j]) + "\n")
    buf.write("singular_values," + ",".join(fmt(v) for v in stab.ammi.singular_values) + "\n")
    buf.write("variance_explained," + ",".join(
        fmt(v) for v in stab.ammi.variance_explained) + "\n")
    files["stability/ammi.csv"] = buf.getvalue()

    lines = ["genotype,slope,intercept,deviation_variance"]
    for r in stab.regressions:
        s2 = "--" if r.deviation_variance is None else fmt(r.deviation_variance, 6)
        lines.append(f"{r.genotype},{fmt(r.slope, 6)},{fmt(r.intercept)},{s2}")
    files["stability/regressions.csv"] = "\n".join(lines) + "\n"

    lines = ["label,kind,axis1,axis2"]
    for i, g in enumerate(m.genotypes):
        lines.append(f"{g},genotype,{fmt(stab.gge.genotype_coords[i, 0])},"
                     f"{fmt(stab.gge.genotype_coords[i, 1])}")
    for j, e in enumerate(m.environments):
        lines.append(f"{e},environment,{fmt(stab.gge.environment_coords[j, 0])},"
                     f"{fmt(stab.gge.environment_coords[j, 1])}")
    files["stability/gge.csv"] = "\n".join(lines) + "\n"
    return files


def _domain_text(result: AnalysisResult) -> str:
    d = result.domain
    lines = [f"mode: {d.mode}"]
    if d.dominant:
        lines.append("dominant: " + ", ".join(e.name for e in d.dominant))
    for eff, reason in d.excluded:
        lines.append(f"excluded: {eff.name} ({reason})")
    return "\n".join(lines)


def report_text(result: AnalysisResult) -> str:
    spec = result.spec
    out = []
    out.append("== Design ==")
    out.append(f"kind: {spec.kind}")
    out.append(f"response: {spec.response}")
    for f in spec.treatment_factors:
        stratum = f" [{f.stratum}]" if f.stratum != "unit" else ""
        out.append(f"factor: {f.name} ({f.role}){stratum} "
                   f"levels: {', '.join(result.design.levels[f.name])}")
    if spec.block_factor is not None:
        b = spec.block_factor
        out.append(f"block: {b.name} ({b.role}) "
                   f"levels: {', '.join(result.design.levels[b.name])}")
    out.append(f"replicates per cell: {result.design.replicates}; "
               f"observations: {result.design.n_rows}")
    out.append(f"alpha: {spec.alpha:g}; alpha_v: {spec.alpha_v:g}")
    out.append("")
    out.append("== ANOVA ==")
    out.append(anova_text(result.anova))
    out.append("")
    out.append("== Interpretation domain ==")
    out.append(_domain_text(result))
    out.append("")
    out.append("== Comparisons (Tukey HSD) ==")
    out.append(comparisons_text(result.comparisons))
    out.append("")
    out.append("== Diagnostics ==")
    out.append(diagnostics_text(result.diagnostics))
    if result.variance_components is not None:
        out.append("")
        out.append("== Variance components ==")
        for term, value in result.variance_components.components.items():
            mark = " (clamped to 0)" if term in result.variance_components.clamped else ""
            out.append(f"{term}: {fmt(value)}{mark}")
    if result.blups is not None:
        out.append("")
        out.append(f"== Predicted means ({result.blups.target}, "
                   f"shrinkage {result.blups.shrinkage:.5f}) ==")
        for e in result.blups.entries:
            out.append(f"{e.level:<12} effect {fmt(e.effect):>9}  "
                       f"predicted {fmt(e.predicted_mean)}")
    if result.heritability is not None:
        out.append("")
        out.append("== Heritability ==")
        out.append(heritability_text(result.heritability))
    if result.stability is not None:
        out.append("")
        out.append("== Stability ==")
        out.append(f"framing: {result.stability.framing}")
        ve = result.stability.ammi.variance_explained
        out.append("interaction variance explained by axes: "
                   + ", ".join(fmt(v) for v in ve))
        for r in result.stability.regressions:
            s2 = "--" if r.deviation_variance is None else fmt(r.deviation_variance, 4)
            out.append(f"{r.genotype}: slope {fmt(r.slope, 4)}, deviation var {s2}")
    if result.warnings:
        out.append("")
        out.append("== Warnings ==")
        out.extend(result.warnings)
    out.append("")
    out.append("== Recommendation ==")
    out.append(result.recommendation.narrative)
    return "\n".join(out) + "\n"


def recommendation_text(rec: Recommendation) -> str:
    lines = [
        f"scope: {rec.scope}",
        f"ranking_basis: {rec.ranking_basis}",
        f"top_group: {', '.join(rec.top_group) if rec.top_group else '(none)'}",
    ]
    for c in rec.validity_caveats:
        lines.append(f"caveat: {c}")
    lines.append("")
    lines.append(rec.narrative)
    return "\n".join(lines) + "\n"


def result_json(result: AnalysisResult) -> str:
    """Structured-document form of the complete analysis."""
    doc = {
        "design": {
            "kind": result.spec.kind,
            "response": result.spec.response,
            "factors": [
                {"name": f.name, "role": f.role, "stratum": f.stratum}
                for f in result.spec.treatment_factors
            ],
            "block": (None if result.spec.block_factor is None
                      else {"name": result.spec.block_factor.name,
                            "role": result.spec.block_factor.role}),
            "alpha": result.spec.alpha,
            "alpha_v": result.spec.alpha_v,
            "replicates": result.design.replicates,
            "n_rows": result.design.n_rows,
        },
        "anova": [
            {"source": r.source, "df": r.df, "ss": round(r.ss, 6),
             "ms": round(r.ms, 6),
             "f": (None if r.f is None else ("inf" if r.f == float("inf")
                                             else round(r.f, 6))),
             "p": None if r.p is None else round(r.p, 8),
             "denominator": r.denominator, "degenerate": r.degenerate}
            for r in result.anova.rows
        ],
        "domain": {
            "mode": result.domain.mode,
            "dominant": [e.name for e in result.domain.dominant],
            "excluded": [{"effect": e.name, "reason": reason}
                         for e, reason in result.domain.excluded],
        },
        "comparisons": [
            {
                "target": cs.target,
                "mse": round(cs.mse, 8),
                "df_error": cs.df_error,
                "conservative": cs.conservative,
                "means": [{"level": e.label, "mean": round(e.mean, 6),
                           "n": e.n, "letters": cs.letters[e.label]}
                          for e in cs.means],
            }
            for cs in result.comparisons
        ],
        "recommendation": {
            "scope": result.recommendation.scope,
            "top_group": list(result.recommendation.top_group),
            "ranking_basis": result.recommendation.ranking_basis,
            "validity_caveats": list(result.recommendation.validity_caveats),
            "narrative": result.recommendation.narrative,
        },
        "warnings": list(result.warnings),
    }
    if result.variance_components is not None:
        doc["variance_components"] = {
            "components": {k: round(v, 8)
                           for k, v in result.variance_components.components.items()},
            "clamped": list(result.variance_components.clamped),
        }
    if result.blups is not None:
        doc["blups"] = [{"level": e.level, "effect": round(e.effect, 6),
                         "predicted_mean": round(e.predicted_mean, 6)}
                        for e in result.blups.entries]
    if result.heritability is not None:
        doc["heritability"] = round(result.heritability.h2, 6)
    return json.dumps(doc, indent=2) + "\n"


def bundle_files(result: AnalysisResult) -> dict[str, str]:
    """Assemble the per-analysis bundle as {relative path: content}."""
    from . import svgplot  # deferred, svgplot imports nothing from here

    files: dict[str, str] = {}
    files["anova.csv"] = anova_csv(result.anova)
    files["comparisons.csv"] = comparisons_csv(result.comparisons)
    files["comparison_pairs.csv"] = comparison_pairs_csv(result.comparisons)
    files["diagnostics.json"] = diagnostics_json(result.diagnostics)
    if result.variance_components is not None:
        files["variance_components.csv"] = variance_components_csv(
            result.variance_components)
    if result.blups is not None:
        files["blup.csv"] = blup_csv(result.blups)
    if result.stability is not None:
        files.update(stability_files(result.stability))
    files["recommendation.txt"] = recommendation_text(result.recommendation)
    files["report.txt"] = report_text(result)
    files["result.json"] = result_json(result)
    plots, notes = svgplot.emit_plots(result)
    for name, svg in plots.items():
        files[f"plots/{name}"] = svg
    if notes:
        files["plots/NOTES.txt"] = "\n".join(notes) + "\n"
    return files


def _sanitize(label: str) -> str:
    out = []
    for ch in label:
        out.append(ch if ch.isalnum() or ch in "=._-" else "_")
    return "".join(out)


def grouped_bundle_files(grouped: GroupedAnalysisResult) -> dict[str, str]:
    files: dict[str, str] = {}
    summary = []
    for key, outcome in grouped.items():
        label = ", ".join(f"{f}={v}" for f, v in zip(grouped.group_factors, key)) or "all"
        sub = "groups/" + _sanitize(
            "_".join(f"{f}={v}" for f, v in zip(grouped.group_factors, key)) or "all")
        if outcome.ok:
            for rel, content in bundle_files(outcome.result).items():
                files[f"{sub}/{rel}"] = content
            summary.append(f"[{label}]\n{outcome.result.recommendation.narrative}")
        else:
            files[f"{sub}/error.json"] = json.dumps(
                outcome.error.to_record(), indent=2) + "\n"
            summary.append(f"[{label}]\nanalysis failed: {outcome.error.message}")
    files["report.txt"] = ("== Grouped analysis ==\n"
                           f"group factors: {', '.join(grouped.group_factors)}\n\n"
                           + "\n\n".join(summary) + "\n")
    return files


def write_bundle(files: dict[str, str], out_dir: str) -> list[str]:
    """Write all files plus a checksum manifest; returns manifest lines."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for rel in sorted(files):
        content = files[rel].encode("utf-8")
        digest = hashlib.sha256(content).hexdigest()
        manifest.append(f"{digest}  {rel}")
    manifest.append("-  manifest.txt")
    for rel in sorted(files):
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path) or out_dir, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(files[rel].encode("utf-8"))
    with open(os.path.join(out_dir, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(manifest) + "\n")
    return manifest
