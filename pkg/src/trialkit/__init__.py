"""Design-driven statistical analysis of balanced experiments.

Declare the experimental design (CRD, RCBD, factorial, split plot, mixed,
multi-environment); the package compiles it into the matching linear model
with the correct error strata, runs the multi-stratum ANOVA, restricts
interpretation to the dominant effects, separates means with Tukey HSD,
checks assumptions, estimates variance components/BLUPs/heritability and
stability where random factors are involved, and emits a decision-oriented
recommendation.
"""

__version__ = "0.1.0"

from .data import Dataset, GroupPartition, builtin_dataset, load_table, partition
from .decision import Recommendation, decide
from .design import (DesignSpec, Effect, EffectSet, FactorSpec, ValidatedDesign,
                     compile_effects, design_from_document, parse_design,
                     validate_against_data)
from .diagnostics import (DiagnosticReport, levene, residuals_by_stratum,
                          run_diagnostics, shapiro_wilk, validity)
from .dist import (f_sf, incomplete_beta, normal_cdf, normal_quantile, normal_sf,
                   studentized_range_quantile, studentized_range_sf, t_sf)
from .engine import AnovaTable, FittedModel, anova, fit, grouped_analyze
from .inference import (AdmissibleDomain, ComparisonSet, admissible_comparisons,
                        dominant_effects, effect_tests, tukey_hsd)
from .mixed import (BlupTable, HeritabilityEstimate, VarianceComponents, blups,
                    estimate_components, heritability)
from .pipeline import AnalysisResult, analyze, analyze_grouped
from .stability import (GeMatrix, StabilityResult, ammi, analyze_stability,
                        eberhart_russell, finlay_wilkinson, gge_coordinates,
                        jacobi_svd)

__all__ = [
    "__version__",
    "Dataset", "GroupPartition", "builtin_dataset", "load_table", "partition",
    "DesignSpec", "Effect", "EffectSet", "FactorSpec", "ValidatedDesign",
    "compile_effects", "design_from_document", "parse_design",
    "validate_against_data",
    "Recommendation", "decide",
    "DiagnosticReport", "levene", "residuals_by_stratum", "run_diagnostics",
    "shapiro_wilk", "validity",
    "f_sf", "incomplete_beta", "normal_cdf", "normal_quantile", "normal_sf",
    "studentized_range_quantile", "studentized_range_sf", "t_sf",
    "AnovaTable", "FittedModel", "anova", "fit", "grouped_analyze",
    "AdmissibleDomain", "ComparisonSet", "admissible_comparisons",
    "dominant_effects", "effect_tests", "tukey_hsd",
    "BlupTable", "HeritabilityEstimate", "VarianceComponents", "blups",
    "estimate_components", "heritability",
    "AnalysisResult", "analyze", "analyze_grouped",
    "GeMatrix", "StabilityResult", "ammi", "analyze_stability",
    "eberhart_russell", "finlay_wilkinson", "gge_coordinates", "jacobi_svd",
]
