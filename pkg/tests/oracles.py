"""Independent oracles used by the test suite.

Everything here recomputes expected values along a different path from the
library: dense least squares with explicit contrast matrices instead of
marginal-mean decompositions, Simpson integration of densities instead of
continued fractions, Monte Carlo simulation instead of quadrature, and a
profile restricted-likelihood search instead of expected-mean-square
algebra.
"""

from __future__ import annotations

import math

import numpy as np

from trialkit.data import Dataset, from_columns


# ---------------------------------------------------------------- LS ANOVA

def _contrast_matrix(n_levels: int) -> np.ndarray:
    """Sum-to-zero coding: L x (L-1), last level carries -1s."""
    c = np.zeros((n_levels, n_levels - 1))
    for j in range(n_levels - 1):
        c[j, j] = 1.0
        c[n_levels - 1, j] = -1.0
    return c


def ls_anova(columns: dict[str, list[str]], y: np.ndarray,
             terms: list[tuple[str, ...]]) -> dict:
    """Brute-force ANOVA by dense least squares with sum-to-zero contrasts.

    Returns per-term df/ss plus the residual df/ss. Valid for balanced
    data, where the term subspaces are mutually orthogonal and component
    norms equal sequential sums of squares.
    """
    n = y.size
    levels = {}
    codes = {}
    for name, col in columns.items():
        seen: dict[str, int] = {}
        code = []
        for v in col:
            if v not in seen:
                seen[v] = len(seen)
            code.append(seen[v])
        levels[name] = list(seen)
        codes[name] = np.array(code)

    blocks = [np.ones((n, 1))]
    spans = []  # (term, column slice in X)
    start = 1
    for term in terms:
        cols = np.ones((n, 1))
        for f in term:
            c = _contrast_matrix(len(levels[f]))[codes[f], :]
            cols = np.einsum("ni,nj->nij", cols, c).reshape(n, -1)
        blocks.append(cols)
        spans.append((term, slice(start, start + cols.shape[1])))
        start += cols.shape[1]
    x = np.hstack(blocks)
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    fitted = x @ beta
    resid = y - fitted

    out = {"terms": {}, "residual": {}}
    df_model = 0
    for term, span in spans:
        component = x[:, span] @ beta[span]
        df = int(np.linalg.matrix_rank(x[:, span]))
        ss = float(component @ component)
        out["terms"][term] = {"df": df, "ss": ss, "ms": ss / df}
        df_model += df
    df_res = n - 1 - df_model
    ss_res = float(resid @ resid)
    out["residual"] = {"df": df_res, "ss": ss_res,
                       "ms": ss_res / df_res if df_res > 0 else 0.0}
    out["beta"] = beta
    out["spans"] = spans
    out["x"] = x
    return out


# ------------------------------------------------------- Simpson integrals

def simpson(fn, lo: float, hi: float, panels: int) -> float:
    if panels % 2 == 1:
        panels += 1
    xs = np.linspace(lo, hi, panels + 1)
    ys = fn(xs)
    h = (hi - lo) / panels
    return float(h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum()
                            + 2.0 * ys[2:-1:2].sum()))


def simpson_beta_cdf(a: float, b: float, x: float, panels: int = 1_000_000) -> float:
    ln_b = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

    def dens(t):
        t = np.clip(t, 1e-300, 1.0 - 1e-16)
        return np.exp((a - 1.0) * np.log(t) + (b - 1.0) * np.log1p(-t) - ln_b)

    return simpson(dens, 0.0, x, panels)


def simpson_f_sf(f: float, d1: int, d2: int, panels: int = 200_000) -> float:
    """P(F > f) as 1 minus the Simpson integral of the F density on [0, f].

    Requires d1 >= 2 so the density is finite at the origin.
    """
    ln_b = (math.lgamma(d1 / 2.0) + math.lgamma(d2 / 2.0)
            - math.lgamma((d1 + d2) / 2.0))
    c = (d1 / 2.0) * math.log(d1 / d2) - ln_b

    def dens(t):
        t = np.maximum(t, 1e-300)
        return np.exp(c + (d1 / 2.0 - 1.0) * np.log(t)
                      - ((d1 + d2) / 2.0) * np.log1p(d1 * t / d2))

    return 1.0 - simpson(dens, 0.0, f, panels)


# ---------------------------------------------------------- Monte Carlo

def mc_studentized_range_quantile(alpha: float, k: int, df: int,
                                  n_samples: int = 10_000_000,
                                  seed: int = 2024,
                                  chunk: int = 500_000) -> float:
    """Empirical (1 - alpha) quantile of simulated studentized ranges."""
    rng = np.random.default_rng(seed + 1000 * k + df)
    samples = np.empty(n_samples)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        z = rng.standard_normal((m, k))
        s = np.sqrt(rng.chisquare(df, m) / df)
        samples[done:done + m] = (z.max(axis=1) - z.min(axis=1)) / s
        done += m
    return float(np.quantile(samples, 1.0 - alpha))


def mc_shapiro_null_p(w_obs: float, n: int, sims: int = 200_000,
                      seed: int = 77) -> float:
    """P(W <= w_obs) under the normal null, by simulation.

    W is computed with the same published weights the implementation uses;
    the simulation independently calibrates the p-value transform.
    """
    from trialkit.diagnostics import _shapiro_weights

    rng = np.random.default_rng(seed)
    a = _shapiro_weights(n)
    x = np.sort(rng.standard_normal((sims, n)), axis=1)
    num = (x @ a) ** 2
    den = ((x - x.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
    w = num / den
    return float((w <= w_obs).mean())


# ------------------------------------------------------------- REML search

def reml_block_components(y: np.ndarray, treat: np.ndarray,
                          block: np.ndarray) -> tuple[float, float]:
    """Profile REML for the one-random-factor (block) model.

    Maximizes the restricted likelihood over the variance ratio by golden
    section and returns (sigma2_block, sigma2_resid).
    """
    n = y.size
    t_levels = int(treat.max()) + 1
    b_levels = int(block.max()) + 1
    x = np.hstack([np.ones((n, 1)), _contrast_matrix(t_levels)[treat, :]])
    z = np.zeros((n, b_levels))
    z[np.arange(n), block] = 1.0
    p = x.shape[1]

    def neg_restricted_ll(gamma: float) -> float:
        v1 = np.eye(n) + gamma * (z @ z.T)
        sign, logdet_v = np.linalg.slogdet(v1)
        vi_y = np.linalg.solve(v1, y)
        vi_x = np.linalg.solve(v1, x)
        xtvx = x.T @ vi_x
        sign2, logdet_x = np.linalg.slogdet(xtvx)
        xtvy = x.T @ vi_y
        quad = float(y @ vi_y - xtvy @ np.linalg.solve(xtvx, xtvy))
        sigma2 = quad / (n - p)
        return 0.5 * ((n - p) * (math.log(sigma2) + 1.0) + logdet_v + logdet_x)

    # coarse log-spaced scan, then golden-section refinement
    grid = [0.0] + [10 ** e for e in np.linspace(-4, 3, 40)]
    best = min(grid, key=neg_restricted_ll)
    idx = grid.index(best)
    lo = grid[max(0, idx - 1)]
    hi = grid[min(len(grid) - 1, idx + 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a_, b_ = lo, hi
    c_ = b_ - phi * (b_ - a_)
    d_ = a_ + phi * (b_ - a_)
    fc, fd = neg_restricted_ll(c_), neg_restricted_ll(d_)
    for _ in range(120):
        if fc < fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - phi * (b_ - a_)
            fc = neg_restricted_ll(c_)
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + phi * (b_ - a_)
            fd = neg_restricted_ll(d_)
        if b_ - a_ < 1e-12 * max(1.0, b_):
            break
    gamma = 0.5 * (a_ + b_)

    v1 = np.eye(n) + gamma * (z @ z.T)
    vi_y = np.linalg.solve(v1, y)
    vi_x = np.linalg.solve(v1, x)
    xtvx = x.T @ vi_x
    xtvy = x.T @ vi_y
    quad = float(y @ vi_y - xtvy @ np.linalg.solve(xtvx, xtvy))
    sigma2 = quad / (n - p)
    return gamma * sigma2, sigma2


# ------------------------------------------------- random dataset factory

KIND_FACTORS = {
    "crd": ("T",),
    "rcbd": ("T",),
    "factorial": ("A", "B", "C", "D"),
    "split_plot": ("W", "S"),
    "mixed": ("T",),
    "met": ("G", "E"),
}


def random_balanced_dataset(kind: str, rng: np.random.Generator,
                            max_levels: int = 4, max_reps: int = 4):
    """A random balanced dataset plus its design document for `kind`."""
    def levels(lo=2):
        return int(rng.integers(lo, max_levels + 1))

    factors: list[tuple[str, int]] = []
    block = None
    if kind == "crd":
        factors = [("T", levels())]
        reps = int(rng.integers(2, max_reps + 1))
        doc = {"kind": "crd", "response": "Y", "factors": [{"name": "T"}]}
    elif kind == "rcbd":
        factors = [("T", levels())]
        block = ("Blk", levels())
        reps = 1
        doc = {"kind": "rcbd", "response": "Y", "factors": [{"name": "T"}],
               "block": "Blk"}
    elif kind == "factorial":
        n_f = int(rng.integers(2, 5))
        names = ["A", "B", "C", "D"][:n_f]
        factors = [(nm, levels()) for nm in names]
        reps = int(rng.integers(2, max_reps + 1))
        doc = {"kind": "factorial", "response": "Y",
               "factors": [{"name": nm} for nm in names]}
    elif kind == "split_plot":
        factors = [("W", levels()), ("S", levels())]
        block = ("Blk", levels())
        reps = 1
        doc = {"kind": "split_plot", "response": "Y",
               "factors": [{"name": "W", "stratum": "whole_plot"},
                           {"name": "S", "stratum": "sub_plot"}],
               "block": "Blk"}
    elif kind == "mixed":
        factors = [("T", levels())]
        block = ("Blk", levels())
        reps = 1
        doc = {"kind": "mixed", "response": "Y", "factors": [{"name": "T"}],
               "block": "Blk"}
    elif kind == "met":
        factors = [("G", levels()), ("E", levels())]
        reps = int(rng.integers(2, max_reps + 1))
        doc = {"kind": "met", "response": "Y",
               "factors": [{"name": "G"}, {"name": "E", "role": "random"}]}
    else:
        raise ValueError(kind)

    all_factors = factors + ([block] if block else [])
    names = [nm for nm, _ in all_factors]
    level_labels = {nm: [f"{nm}{i+1}" for i in range(k)] for nm, k in all_factors}
    cols: dict[str, list[str]] = {nm: [] for nm in names}
    yvals: list[float] = []
    shape = [k for _, k in all_factors]
    import itertools

    for combo in itertools.product(*(range(k) for k in shape)):
        for _ in range(reps):
            for (nm, _k), lv in zip(all_factors, combo):
                cols[nm].append(level_labels[nm][lv])
            yvals.append(round(float(rng.normal(50.0, 8.0)), 4))
    dataset = from_columns(names + ["Y"], [cols[nm] for nm in names] + [yvals])
    return doc, dataset


def dataset_from_arrays(names: list[str], columns: list[list]) -> Dataset:
    return from_columns(names, columns)
