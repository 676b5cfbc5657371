"""Variance components, shrinkage predictions and heritability.

Components come from the expected-mean-squares identities, which coincide
with the restricted-likelihood optimum under balance. Negative raw solutions
are clamped to zero and the clamping is recorded so reports can surface it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .design import ValidatedDesign
from .engine import AnovaTable, FittedModel
from .errors import DegenerateShrinkage, NotApplicable


@dataclass(frozen=True)
class VarianceComponents:
    components: dict[str, float]
    clamped: tuple[str, ...]

    def get(self, term: str) -> float:
        return self.components[term]


@dataclass(frozen=True)
class BlupEntry:
    level: str
    effect: float          # shrunken deviation from the grand mean
    predicted_mean: float  # grand mean + effect


@dataclass(frozen=True)
class BlupTable:
    target: str
    entries: tuple[BlupEntry, ...]  # sorted by predicted mean, descending
    shrinkage: float
    grand_mean: float


@dataclass(frozen=True)
class HeritabilityEstimate:
    h2: float
    genotypic_variance: float
    interaction_variance: float
    residual_variance: float
    n_env: int
    n_rep: int


def _clamp(raw: float, term: str, clamped: list[str]) -> float:
    if raw < 0.0:
        clamped.append(term)
        return 0.0
    return raw


def estimate_components(anova: AnovaTable, design: ValidatedDesign) -> VarianceComponents:
    """ANOVA-method (expected mean squares) variance component estimates.

    mixed kind:  sigma2_block = (MS_block - MS_error) / t
    met kind:    sigma2_gxe = (MS_gxe - MS_error) / r
                 sigma2_g   = (MS_g - MS_gxe) / (r * e)
                 sigma2_env = (MS_env - MS_gxe) / (r * g)
    """
    spec = design.spec
    ms_error = anova.residual.ms
    clamped: list[str] = []

    if spec.kind == "mixed":
        t_name = spec.treatment_factors[0].name
        b_name = spec.block_factor.name
        t = design.n_levels(t_name)
        ms_block = anova.row(b_name).ms
        comps = {
            b_name: _clamp((ms_block - ms_error) / t, b_name, clamped),
            "Residual": ms_error,
        }
        return VarianceComponents(comps, tuple(clamped))

    if spec.kind == "met":
        g_name = spec.genotype_factor().name
        e_name = spec.environment_factor().name
        inter = f"{g_name} x {e_name}"
        r = design.replicates
        g = design.n_levels(g_name)
        e = design.n_levels(e_name)
        ms_g = anova.row(g_name).ms
        ms_e = anova.row(e_name).ms
        ms_ge = anova.row(inter).ms
        comps = {
            g_name: _clamp((ms_g - ms_ge) / (r * e), g_name, clamped),
            e_name: _clamp((ms_e - ms_ge) / (r * g), e_name, clamped),
            inter: _clamp((ms_ge - ms_error) / r, inter, clamped),
            "Residual": ms_error,
        }
        return VarianceComponents(comps, tuple(clamped))

    raise NotApplicable(
        f"design kind '{spec.kind}' declares no random factors", kind=spec.kind)


def blups(vc: VarianceComponents, model: FittedModel,
          design: ValidatedDesign) -> BlupTable:
    """Shrunken level predictions for the design's ranking target.

    u_hat = lambda * (level mean - grand mean) with
    lambda = sigma2_target / (sigma2_target + var(level mean | components)).
    For the met kind the level-mean error variance is
    sigma2_gxe/e + sigma2_resid/(r*e); for the mixed kind it is
    sigma2_resid/m with the target's as-if-random variance recovered from
    the fitted deviations.
    """
    spec = design.spec
    target = spec.blup_target()
    if target is None:
        raise NotApplicable(f"no prediction target for kind '{spec.kind}'",
                            kind=spec.kind)
    name = target.name
    m = design.n_rows // design.n_levels(name)
    sigma_resid = vc.components["Residual"]

    if spec.kind == "met":
        e = design.n_levels(spec.environment_factor().name)
        r = design.replicates
        sigma_target = vc.components[name]
        inter = f"{name} x {spec.environment_factor().name}"
        mean_error_var = vc.components[inter] / e + sigma_resid / (r * e)
    else:
        devs = model.deviations_vector((name,))
        t = devs.size
        ms_target = m * float((devs ** 2).sum()) / (t - 1)
        sigma_target = max(0.0, (ms_target - sigma_resid) / m)
        mean_error_var = sigma_resid / m

    total = sigma_target + mean_error_var
    if total == 0.0:
        raise DegenerateShrinkage("total variance of the level mean is zero",
                                  target=name)
    lam = sigma_target / total

    entries = []
    raw_dev = {}
    for (level,), dev in model.effect_deviations[(name,)].items():
        u = lam * dev
        raw_dev[level] = dev
        entries.append(BlupEntry(level, u, model.grand_mean + u))
    # raw deviation breaks ties so full shrinkage keeps the observed order
    entries.sort(key=lambda b: (-b.predicted_mean, -raw_dev[b.level], b.level))
    return BlupTable(name, tuple(entries), lam, model.grand_mean)


def heritability(vc: VarianceComponents, n_env: int, n_rep: int,
                 genotype: str, interaction: str) -> HeritabilityEstimate:
    """Broad-sense heritability on an entry-mean basis.

    H2 = sigma2_g / (sigma2_g + sigma2_gxe/e + sigma2_resid/(r*e)); defined
    as 0 when every component is zero.
    """
    sg = vc.components[genotype]
    sge = vc.components[interaction]
    se = vc.components["Residual"]
    denom = sg + sge / n_env + se / (n_rep * n_env)
    h2 = 0.0 if denom == 0.0 else sg / denom
    return HeritabilityEstimate(h2, sg, sge, se, n_env, n_rep)
