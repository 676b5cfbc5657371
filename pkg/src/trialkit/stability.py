"""Genotype-by-environment stability and adaptability analysis.

All methods operate on the genotype x environment matrix of cell means:
additive-plus-multiplicative decomposition of the double-centered matrix,
per-genotype regression on the environment index (slope = adaptability,
deviation variance = stability), and the environment-centered 2-D biplot
coordinates. The SVD kernel is a one-sided Jacobi iteration, which is exact
enough for these tiny dense matrices and fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantEnvironmentIndex, DegenerateMatrix

WIDE_ADAPTATION = "wide_adaptation"
ENVIRONMENT_SPECIFIC = "environment_specific"


@dataclass(frozen=True)
class GeMatrix:
    values: np.ndarray  # genotype x environment cell means
    genotypes: tuple[str, ...]
    environments: tuple[str, ...]

    def __post_init__(self):
        g, e = self.values.shape
        if g != len(self.genotypes) or e != len(self.environments):
            raise DegenerateMatrix("matrix shape does not match labels")


@dataclass(frozen=True)
class AmmiResult:
    singular_values: np.ndarray
    genotype_scores: np.ndarray     # g x n_components, scaled by sqrt(sv)
    environment_scores: np.ndarray  # e x n_components, scaled by sqrt(sv)
    variance_explained: np.ndarray


@dataclass(frozen=True)
class RegressionEntry:
    genotype: str
    slope: float
    intercept: float
    deviation_variance: float | None  # None when e = 2 leaves no df


@dataclass(frozen=True)
class GgeResult:
    genotype_coords: np.ndarray     # g x 2
    environment_coords: np.ndarray  # e x 2
    variance_explained: np.ndarray  # of the first two components


@dataclass(frozen=True)
class StabilityResult:
    matrix: GeMatrix
    ammi: AmmiResult
    regressions: tuple[RegressionEntry, ...]
    gge: GgeResult
    framing: str  # WIDE_ADAPTATION or ENVIRONMENT_SPECIFIC


def jacobi_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition by one-sided Jacobi rotations.

    Returns (u, s, v) with a = u @ diag(s) @ v.T, singular values in
    descending order. Columns belonging to zero singular values are zeroed,
    and each nonzero left singular vector has its largest-magnitude entry
    made positive so results are reproducible under row/column reordering
    of the input.
    """
    a = np.asarray(a, dtype=float)
    transpose = a.shape[0] < a.shape[1]
    if transpose:
        a = a.T
    m, n = a.shape
    u = a.copy()
    v = np.eye(n)
    eps = 1e-14
    for _ in range(60):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(u[:, p] @ u[:, p])
                beta = float(u[:, q] @ u[:, q])
                gamma = float(u[:, p] @ u[:, q])
                if abs(gamma) <= eps * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                off = max(off, abs(gamma))
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * up - s * uq
                u[:, q] = s * up + c * uq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if off == 0.0:
            break
    norms = np.sqrt((u ** 2).sum(axis=0))
    scale = float(norms.max()) if norms.size else 0.0
    sv = norms.copy()
    nonzero = sv > (scale * 1e-12 if scale > 0 else 0.0)
    u_out = np.zeros_like(u)
    u_out[:, nonzero] = u[:, nonzero] / sv[nonzero]
    sv[~nonzero] = 0.0
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    u_out = u_out[:, order]
    v = v[:, order]
    for j in range(n):
        if sv[j] == 0.0:
            u_out[:, j] = 0.0
            v[:, j] = 0.0
            continue
        pivot = int(np.argmax(np.abs(u_out[:, j])))
        if u_out[pivot, j] < 0:
            u_out[:, j] = -u_out[:, j]
            v[:, j] = -v[:, j]
    if transpose:
        return v, sv, u_out
    return u_out, sv, v


def ammi(m: GeMatrix) -> AmmiResult:
    """Additive main effects + multiplicative interaction decomposition.

    The matrix is double-centered (genotype means, environment means, grand
    mean restored), then decomposed; scores carry sqrt(singular value) on
    each side so genotype and environment displays share a scale.
    """
    vals = m.values
    if vals.shape[0] < 2 or vals.shape[1] < 2:
        raise DegenerateMatrix("AMMI requires at least a 2 x 2 matrix",
                               shape=vals.shape)
    centered = (vals - vals.mean(axis=1, keepdims=True)
                - vals.mean(axis=0, keepdims=True) + vals.mean())
    u, sv, v = jacobi_svd(centered)
    n_comp = min(vals.shape[0] - 1, vals.shape[1] - 1)
    u, sv, v = u[:, :n_comp], sv[:n_comp], v[:, :n_comp]
    total = float((sv ** 2).sum())
    explained = (sv ** 2) / total if total > 0 else np.zeros_like(sv)
    root = np.sqrt(sv)
    return AmmiResult(sv, u * root, v * root, explained)


def environment_index(m: GeMatrix) -> np.ndarray:
    """Environment mean minus grand mean; the shared regressor."""
    idx = m.values.mean(axis=0) - m.values.mean()
    if float((idx ** 2).sum()) == 0.0:
        raise ConstantEnvironmentIndex("all environment means are equal")
    return idx


def finlay_wilkinson(m: GeMatrix) -> tuple[RegressionEntry, ...]:
    """Per-genotype regression on the environment index (slope only)."""
    return _regressions(m, with_deviation=False)


def eberhart_russell(m: GeMatrix) -> tuple[RegressionEntry, ...]:
    """Regression slopes plus deviation-from-regression variances."""
    return _regressions(m, with_deviation=True)


def _regressions(m: GeMatrix, with_deviation: bool) -> tuple[RegressionEntry, ...]:
    e = m.values.shape[1]
    if e < 2:
        raise DegenerateMatrix("stability regression needs at least 2 environments",
                               environments=e)
    idx = environment_index(m)
    denom = float((idx ** 2).sum())
    entries = []
    for i, g in enumerate(m.genotypes):
        row = m.values[i]
        intercept = float(row.mean())
        slope = float((idx * (row - intercept)).sum() / denom)
        s2 = None
        # e = 2 leaves no df for the deviation variance; report it absent
        if with_deviation and e > 2:
            resid = row - intercept - slope * idx
            s2 = max(0.0, float((resid ** 2).sum() / (e - 2)))
        entries.append(RegressionEntry(g, slope, intercept, s2))
    return tuple(entries)


def gge_coordinates(m: GeMatrix) -> GgeResult:
    """First two components of the environment-centered matrix.

    Centering removes only environment means, so genotype main effects stay
    in the display alongside the interaction; both sides are scaled by
    sqrt(singular value).
    """
    vals = m.values
    if vals.shape[0] < 2 or vals.shape[1] < 2:
        raise DegenerateMatrix("GGE requires at least a 2 x 2 matrix",
                               shape=vals.shape)
    centered = vals - vals.mean(axis=0, keepdims=True)
    u, sv, v = jacobi_svd(centered)
    total = float((sv ** 2).sum())
    take = min(2, sv.size)
    root = np.sqrt(sv[:take])
    gcoord = np.zeros((vals.shape[0], 2))
    ecoord = np.zeros((vals.shape[1], 2))
    gcoord[:, :take] = u[:, :take] * root
    ecoord[:, :take] = v[:, :take] * root
    explained = np.zeros(2)
    if total > 0:
        explained[:take] = (sv[:take] ** 2) / total
    return GgeResult(gcoord, ecoord, explained)


def analyze_stability(m: GeMatrix, interaction_significant: bool) -> StabilityResult:
    """Run all stability procedures and attach the interpretation framing."""
    framing = ENVIRONMENT_SPECIFIC if interaction_significant else WIDE_ADAPTATION
    return StabilityResult(
        matrix=m,
        ammi=ammi(m),
        regressions=eberhart_russell(m),
        gge=gge_coordinates(m),
        framing=framing,
    )
