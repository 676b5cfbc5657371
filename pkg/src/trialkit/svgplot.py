"""Hand-built SVG plot emitters.

No plotting library: each figure is assembled as literal SVG markup with a
fixed 640x480 canvas, fixed margins and fixed decimal formatting, so plot
files are byte-stable across runs. Every figure embeds its data values as
text so the numbers survive without a viewer.
"""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 640.0, 480.0
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70.0, 30.0, 50.0, 60.0
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B

PALETTE = ("#1f6fb2", "#d2691e", "#2e8b57", "#a23b72", "#6a5acd",
           "#b8860b", "#708090", "#c0392b", "#16a085")


def _n(x: float) -> str:
    return f"{x:.2f}"


class _Svg:
    def __init__(self, title: str):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0f}" '
            f'height="{HEIGHT:.0f}" viewBox="0 0 {WIDTH:.0f} {HEIGHT:.0f}">',
            f'<rect x="0" y="0" width="{WIDTH:.0f}" height="{HEIGHT:.0f}" fill="white"/>',
        ]
        self.text(WIDTH / 2, 24, title, size=15, anchor="middle", bold=True)

    def line(self, x1, y1, x2, y2, color="#333333", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_n(x1)}" y1="{_n(y1)}" x2="{_n(x2)}" y2="{_n(y2)}" '
            f'stroke="{color}" stroke-width="{width:g}"{d}/>')

    def rect(self, x, y, w, h, fill="none", stroke="#333333"):
        self.parts.append(
            f'<rect x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}" '
            f'fill="{fill}" stroke="{stroke}"/>')

    def circle(self, cx, cy, r, fill="#1f6fb2"):
        self.parts.append(
            f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{r:g}" fill="{fill}"/>')

    def polyline(self, points, color="#1f6fb2", width=1.5):
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width:g}"/>')

    def text(self, x, y, s, size=12, anchor="start", bold=False, color="#111111"):
        weight = ' font-weight="bold"' if bold else ""
        s = (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
        self.parts.append(
            f'<text x="{_n(x)}" y="{_n(y)}" font-family="monospace" '
            f'font-size="{size}" text-anchor="{anchor}"{weight} '
            f'fill="{color}">{s}</text>')

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _y_scale(lo: float, hi: float):
    if hi == lo:
        hi = lo + 1.0
    pad = 0.08 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def to_y(v: float) -> float:
        return MARGIN_T + PLOT_H * (1.0 - (v - lo) / (hi - lo))

    return lo, hi, to_y


def _axes(svg: _Svg, lo: float, hi: float, to_y, y_label: str):
    svg.line(MARGIN_L, MARGIN_T, MARGIN_L, MARGIN_T + PLOT_H)
    svg.line(MARGIN_L, MARGIN_T + PLOT_H, MARGIN_L + PLOT_W, MARGIN_T + PLOT_H)
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = lo + frac * (hi - lo)
        y = to_y(v)
        svg.line(MARGIN_L - 4, y, MARGIN_L, y)
        svg.text(MARGIN_L - 8, y + 4, f"{v:.2f}", size=10, anchor="end")
    svg.text(16, MARGIN_T - 10, y_label, size=11)


def boxplot_with_letters(title: str, groups: dict[str, np.ndarray],
                         letters: dict[str, str], y_label: str) -> str:
    """Quartile boxes with whiskers to the extremes and a letter above each."""
    svg = _Svg(title)
    labels = list(groups)
    all_vals = np.concatenate([np.asarray(groups[lab], dtype=float)
                               for lab in labels])
    lo, hi, to_y = _y_scale(float(all_vals.min()), float(all_vals.max()))
    _axes(svg, lo, hi, to_y, y_label)
    slot = PLOT_W / len(labels)
    box_w = min(60.0, slot * 0.5)
    for i, lab in enumerate(labels):
        vals = np.asarray(groups[lab], dtype=float)
        q1, med, q3 = (float(np.quantile(vals, q)) for q in (0.25, 0.5, 0.75))
        vmin, vmax = float(vals.min()), float(vals.max())
        cx = MARGIN_L + slot * (i + 0.5)
        color = PALETTE[i % len(PALETTE)]
        svg.line(cx, to_y(vmin), cx, to_y(q1), color=color)
        svg.line(cx, to_y(q3), cx, to_y(vmax), color=color)
        svg.line(cx - box_w / 4, to_y(vmin), cx + box_w / 4, to_y(vmin), color=color)
        svg.line(cx - box_w / 4, to_y(vmax), cx + box_w / 4, to_y(vmax), color=color)
        svg.rect(cx - box_w / 2, to_y(q3), box_w, to_y(q1) - to_y(q3),
                 fill="none", stroke=color)
        svg.line(cx - box_w / 2, to_y(med), cx + box_w / 2, to_y(med),
                 color=color, width=2.0)
        svg.text(cx, to_y(vmax) - 8, letters.get(lab, ""), anchor="middle",
                 bold=True)
        svg.text(cx, MARGIN_T + PLOT_H + 16, lab, size=10, anchor="middle")
        svg.text(cx, MARGIN_T + PLOT_H + 30, f"{float(vals.mean()):.2f}",
                 size=9, anchor="middle", color="#555555")
    return svg.finish()


def interaction_plot(title: str, x_levels, trace_levels, cell_means,
                     x_name: str, trace_name: str, y_label: str) -> str:
    """One line per trace level across the x-factor levels."""
    svg = _Svg(title)
    values = [cell_means[(x, t)] for x in x_levels for t in trace_levels]
    lo, hi, to_y = _y_scale(min(values), max(values))
    _axes(svg, lo, hi, to_y, y_label)
    slot = PLOT_W / len(x_levels)
    xs = [MARGIN_L + slot * (i + 0.5) for i in range(len(x_levels))]
    for i, lab in enumerate(x_levels):
        svg.text(xs[i], MARGIN_T + PLOT_H + 16, lab, size=10, anchor="middle")
    svg.text(MARGIN_L + PLOT_W / 2, MARGIN_T + PLOT_H + 34, x_name,
             size=11, anchor="middle")
    for j, t in enumerate(trace_levels):
        color = PALETTE[j % len(PALETTE)]
        pts = [(xs[i], to_y(cell_means[(x, t)])) for i, x in enumerate(x_levels)]
        svg.polyline(pts, color=color)
        for (px, py), x in zip(pts, x_levels):
            svg.circle(px, py, 3, fill=color)
            svg.text(px + 5, py - 5, f"{cell_means[(x, t)]:.2f}", size=9,
                     color="#555555")
        svg.text(pts[-1][0] + 8, pts[-1][1] + 4, f"{trace_name}={t}",
                 size=10, color=color)
    return svg.finish()


def bar_chart(title: str, labels, values, y_label: str,
              baseline_zero: bool = True) -> str:
    """Vertical bars with the value printed above each bar."""
    svg = _Svg(title)
    vmin = min(0.0, min(values)) if baseline_zero else min(values)
    vmax = max(0.0, max(values)) if baseline_zero else max(values)
    lo, hi, to_y = _y_scale(vmin, vmax)
    _axes(svg, lo, hi, to_y, y_label)
    slot = PLOT_W / len(labels)
    bar_w = min(80.0, slot * 0.6)
    y0 = to_y(0.0)
    svg.line(MARGIN_L, y0, MARGIN_L + PLOT_W, y0, color="#999999", dash="4,3")
    for i, (lab, v) in enumerate(zip(labels, values)):
        cx = MARGIN_L + slot * (i + 0.5)
        color = PALETTE[i % len(PALETTE)]
        top = min(to_y(v), y0)
        height = abs(to_y(v) - y0)
        svg.rect(cx - bar_w / 2, top, bar_w, height, fill=color, stroke="none")
        svg.text(cx, top - 6 if v >= 0 else top + height + 14, f"{v:.3f}",
                 size=10, anchor="middle")
        svg.text(cx, MARGIN_T + PLOT_H + 16, lab, size=10, anchor="middle")
    return svg.finish()


def biplot(title: str, genotype_coords, genotype_labels,
           environment_coords, environment_labels, explained) -> str:
    """2-D display of genotype points and environment vectors."""
    svg = _Svg(title)
    all_x = np.concatenate([genotype_coords[:, 0], environment_coords[:, 0], [0.0]])
    all_y = np.concatenate([genotype_coords[:, 1], environment_coords[:, 1], [0.0]])
    span = float(max(np.abs(all_x).max(), np.abs(all_y).max(), 1e-9)) * 1.15
    size = min(PLOT_W, PLOT_H)
    cx0 = MARGIN_L + PLOT_W / 2
    cy0 = MARGIN_T + PLOT_H / 2

    def to_xy(x, y):
        return (cx0 + (x / span) * size / 2, cy0 - (y / span) * size / 2)

    svg.line(cx0 - size / 2, cy0, cx0 + size / 2, cy0, color="#bbbbbb")
    svg.line(cx0, cy0 - size / 2, cx0, cy0 + size / 2, color="#bbbbbb")
    svg.text(cx0 + size / 2 - 4, cy0 - 6,
             f"axis1 ({100 * explained[0]:.1f}%)", size=10, anchor="end")
    svg.text(cx0 + 6, cy0 - size / 2 + 12,
             f"axis2 ({100 * explained[1]:.1f}%)", size=10)
    for j, lab in enumerate(environment_labels):
        x, y = to_xy(environment_coords[j, 0], environment_coords[j, 1])
        svg.line(cx0, cy0, x, y, color="#d2691e", width=1.2)
        svg.rect(x - 3, y - 3, 6, 6, fill="#d2691e", stroke="none")
        svg.text(x + 6, y - 4, lab, size=10, color="#d2691e")
    for i, lab in enumerate(genotype_labels):
        x, y = to_xy(genotype_coords[i, 0], genotype_coords[i, 1])
        svg.circle(x, y, 4, fill="#1f6fb2")
        svg.text(x + 6, y + 4, lab, size=11, color="#1f6fb2", bold=True)
    return svg.finish()


def _sanitize(name: str) -> str:
    return "".join(ch.lower() if ch.isalnum() else "_" for ch in name).strip("_")


def _group_observations(result, cs):
    """Raw response values per comparison-set label, in set order."""
    design = result.design
    model = result.model
    y = model.response
    target = cs.target
    if " within " in target:
        factor, ctx = target.split(" within ", 1)
        conditions = dict(part.split("=", 1) for part in ctx.split(", "))
        mask = np.ones(y.size, dtype=bool)
        for f, lv in conditions.items():
            code = design.levels[f].index(lv)
            mask &= model.codes[f] == code
        groups = {}
        for e in cs.means:
            code = design.levels[factor].index(e.label)
            groups[e.label] = y[mask & (model.codes[factor] == code)]
        return groups
    factors = tuple(target.split(" x "))
    groups = {}
    for e in cs.means:
        levels = tuple(e.label.split(":")) if len(factors) > 1 else (e.label,)
        mask = np.ones(y.size, dtype=bool)
        for f, lv in zip(factors, levels):
            mask &= model.codes[f] == design.levels[f].index(lv)
        groups[e.label] = y[mask]
    return groups


def emit_plots(result) -> tuple[dict[str, str], list[str]]:
    """All applicable figures for one analysis: {filename: svg}, notes."""
    plots: dict[str, str] = {}
    notes: list[str] = []
    response = result.spec.response

    if not result.comparisons:
        notes.append("no comparison plot: no admissible comparisons "
                     "(no significant treatment effects)")
    for cs in result.comparisons:
        groups = _group_observations(result, cs)
        name = f"box_{_sanitize(cs.target)}.svg"
        plots[name] = boxplot_with_letters(
            f"{cs.target}: Tukey HSD groups", groups, cs.letters, response)

    two_way = [e for e in result.effects.effects
               if e.order == 2
               and set(e.factors) <= set(result.spec.treatment_names())]
    for eff in two_way:
        a, b = eff.factors
        cells = {}
        for (la, lb), m in result.model.marginal_means[eff.factors].items():
            cells[(la, lb)] = m
        name = f"interaction_{_sanitize(a)}_x_{_sanitize(b)}.svg"
        plots[name] = interaction_plot(
            f"{a} x {b} interaction", result.design.levels[a],
            result.design.levels[b], cells, a, b, response)

    if result.variance_components is not None:
        comps = result.variance_components.components
        total = sum(comps.values())
        if total > 0:
            labels = list(comps)
            props = [comps[k] / total for k in labels]
            plots["variance_components.svg"] = bar_chart(
                "Proportion of total variance", labels, props, "proportion")
        else:
            notes.append("variance plot skipped: all components zero")

    if result.blups is not None:
        labels = [e.level for e in result.blups.entries]
        effects = [e.effect for e in result.blups.entries]
        plots["blup_ranking.svg"] = bar_chart(
            f"Predicted {result.blups.target} effects "
            f"(shrinkage {result.blups.shrinkage:.4f})",
            labels, effects, "effect")

    if result.stability is not None:
        stab = result.stability
        plots["gge_biplot.svg"] = biplot(
            "GGE biplot (environment-centered)",
            stab.gge.genotype_coords, stab.matrix.genotypes,
            stab.gge.environment_coords, stab.matrix.environments,
            stab.gge.variance_explained)
    return plots, notes
