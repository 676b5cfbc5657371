"""Declarative experimental designs and their compiled model structure.

A design document names the design kind, the response, the treatment
factors (with roles and, for split plots, strata) and optionally a block.
Compilation turns that into the canonical effect list for the kind together
with the error-stratum map that every downstream F-test consults, so the
choice of denominator never depends on the analyst.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .data import Dataset
from .errors import (ConstraintError, InsufficientLevels, MissingColumn,
                     NonNumericResponse, SchemaError, UnbalancedDesign)

KINDS = ("crd", "rcbd", "factorial", "split_plot", "mixed", "met")
ROLES = ("fixed", "random")
STRATA_KINDS = ("whole_plot", "sub_plot", "unit")

RESIDUAL = "residual"
WHOLE_PLOT_ERROR = "whole_plot_error"


@dataclass(frozen=True)
class FactorSpec:
    name: str
    role: str = "fixed"
    stratum: str = "unit"


@dataclass(frozen=True)
class DesignSpec:
    kind: str
    response: str
    treatment_factors: tuple[FactorSpec, ...]
    block_factor: FactorSpec | None = None
    group_factors: tuple[str, ...] = ()
    alpha: float = 0.05
    alpha_v: float = 0.05

    def factor_names(self) -> tuple[str, ...]:
        names = [f.name for f in self.treatment_factors]
        if self.block_factor is not None:
            names.append(self.block_factor.name)
        return tuple(names)

    def treatment_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.treatment_factors)

    def whole_plot_factor(self) -> FactorSpec:
        return next(f for f in self.treatment_factors if f.stratum == "whole_plot")

    def sub_plot_factor(self) -> FactorSpec:
        return next(f for f in self.treatment_factors if f.stratum == "sub_plot")

    def genotype_factor(self) -> FactorSpec:
        return next(f for f in self.treatment_factors if f.role == "fixed")

    def environment_factor(self) -> FactorSpec:
        return next(f for f in self.treatment_factors if f.role == "random")

    def blup_target(self) -> FactorSpec | None:
        """Factor whose levels are ranked by shrunken prediction."""
        if self.kind == "mixed":
            return next((f for f in self.treatment_factors if f.role == "fixed"), None)
        if self.kind == "met":
            return self.genotype_factor()
        return None


@dataclass(frozen=True)
class Effect:
    factors: tuple[str, ...]
    role: str
    denominator: str

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def name(self) -> str:
        return " x ".join(self.factors)


@dataclass(frozen=True)
class Stratum:
    label: str
    defining_factors: tuple[str, ...] | None  # None for the residual stratum


@dataclass(frozen=True)
class EffectSet:
    effects: tuple[Effect, ...]
    strata: tuple[Stratum, ...]

    def effect(self, factors: tuple[str, ...]) -> Effect:
        for e in self.effects:
            if e.factors == factors:
                return e
        raise KeyError(factors)

    def stratum_labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.strata)


@dataclass(frozen=True)
class ValidatedDesign:
    spec: DesignSpec
    levels: dict[str, tuple[str, ...]] = field(default_factory=dict)
    replicates: int = 1
    n_rows: int = 0

    def n_levels(self, factor: str) -> int:
        return len(self.levels[factor])


_TOP_KEYS = {"kind", "response", "factors", "block", "groups", "alpha", "alpha_v"}
_FACTOR_KEYS = {"name", "role", "stratum"}


def _require_identifier(value, what: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"{what} must be a nonempty string", value=value)
    return value.strip()


def _parse_probability(doc: dict, key: str) -> float:
    if key not in doc:
        return 0.05
    v = doc[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise SchemaError(f"'{key}' must be a number", value=v)
    v = float(v)
    if not 0.0 < v < 1.0:
        raise ConstraintError(f"'{key}' must lie strictly between 0 and 1", value=v)
    return v


def _parse_factor(entry, kind: str) -> FactorSpec:
    if not isinstance(entry, dict):
        raise SchemaError("each factor must be an object with a 'name'", value=entry)
    extra = set(entry) - _FACTOR_KEYS
    if extra:
        raise SchemaError(f"unknown factor keys: {sorted(extra)}", keys=sorted(extra))
    name = _require_identifier(entry.get("name"), "factor name")
    role = entry.get("role", "fixed")
    if role not in ROLES:
        raise SchemaError(f"factor role must be one of {ROLES}", value=role)
    stratum = entry.get("stratum", "unit")
    if stratum not in STRATA_KINDS:
        raise SchemaError(f"factor stratum must be one of {STRATA_KINDS}", value=stratum)
    if stratum != "unit" and kind != "split_plot":
        raise ConstraintError(
            "factor strata other than 'unit' are only valid for split_plot designs",
            factor=name, stratum=stratum)
    return FactorSpec(name, role, stratum)


def _parse_block(doc, kind: str) -> FactorSpec | None:
    if "block" not in doc:
        return None
    entry = doc["block"]
    role = "random" if kind == "mixed" else "fixed"
    if isinstance(entry, str):
        return FactorSpec(_require_identifier(entry, "block"), role)
    if isinstance(entry, dict):
        extra = set(entry) - {"name", "role"}
        if extra:
            raise SchemaError(f"unknown block keys: {sorted(extra)}", keys=sorted(extra))
        name = _require_identifier(entry.get("name"), "block name")
        declared = entry.get("role", role)
        if declared not in ROLES:
            raise SchemaError(f"block role must be one of {ROLES}", value=declared)
        if declared != role:
            raise ConstraintError(
                f"block role for kind '{kind}' is '{role}' by convention",
                declared=declared)
        return FactorSpec(name, role)
    raise SchemaError("'block' must be a string or an object", value=entry)


def _check_kind_invariants(spec: DesignSpec) -> None:
    kind = spec.kind
    factors = spec.treatment_factors
    names = [f.name for f in factors]
    if spec.block_factor is not None:
        names.append(spec.block_factor.name)
    if names and len(set(names)) != len(names):
        raise ConstraintError("factor names must be unique", names=names)
    if spec.response in names:
        raise ConstraintError("response cannot also be a factor", response=spec.response)

    if kind == "crd":
        if len(factors) != 1:
            raise ConstraintError("crd requires exactly one treatment factor")
        if spec.block_factor is not None:
            raise ConstraintError("crd does not take a block factor")
    elif kind == "rcbd":
        if len(factors) != 1:
            raise ConstraintError("rcbd requires exactly one treatment factor")
        if spec.block_factor is None:
            raise ConstraintError("rcbd requires a block factor")
    elif kind == "factorial":
        if len(factors) < 2:
            raise ConstraintError("factorial requires at least two crossed treatment factors")
        if spec.block_factor is not None:
            raise ConstraintError("factorial designs here are unblocked; use split_plot or rcbd")
    elif kind == "split_plot":
        wp = [f for f in factors if f.stratum == "whole_plot"]
        sp = [f for f in factors if f.stratum == "sub_plot"]
        if len(factors) != 2 or len(wp) != 1 or len(sp) != 1:
            raise ConstraintError(
                "split_plot requires exactly one whole_plot and one sub_plot factor")
        if spec.block_factor is None:
            raise ConstraintError("split_plot requires a block factor")
    elif kind == "mixed":
        fixed = [f for f in factors if f.role == "fixed"]
        if not fixed:
            raise ConstraintError("mixed requires at least one fixed treatment factor")
        if any(f.role == "random" for f in factors):
            raise ConstraintError(
                "mixed models random blocks; crossed random treatment factors belong to kind 'met'")
        if len(factors) != 1:
            raise ConstraintError("mixed currently supports exactly one treatment factor")
        if spec.block_factor is None:
            raise ConstraintError("mixed requires a (random) block factor")
    elif kind == "met":
        if len(factors) != 2:
            raise ConstraintError("met requires a genotype factor and an environment factor")
        random = [f for f in factors if f.role == "random"]
        if len(random) != 1:
            raise ConstraintError("met requires the environment factor to be marked random")
        if spec.block_factor is not None:
            raise ConstraintError("met does not take a block factor")
    else:  # pragma: no cover - guarded by schema check
        raise ConstraintError(f"unknown design kind '{kind}'")

    if spec.kind != "split_plot" and any(f.stratum != "unit" for f in factors):
        raise ConstraintError("only split_plot designs assign factor strata")

    for g in spec.group_factors:
        if g in names or g == spec.response:
            raise ConstraintError(
                "group factors must be distinct from model factors and response", group=g)


def parse_design(text: str) -> DesignSpec:
    """Parse and validate a design document (JSON, exact keys).

    Unknown keys are rejected (SchemaError); kind-specific structural rules
    are enforced afterwards (ConstraintError).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"design document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("design document must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise SchemaError(f"unknown design keys: {sorted(extra)}", keys=sorted(extra))
    for required in ("kind", "response", "factors"):
        if required not in doc:
            raise SchemaError(f"missing required key '{required}'", key=required)
    kind = doc["kind"]
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}", value=kind)
    response = _require_identifier(doc["response"], "response")
    if not isinstance(doc["factors"], list) or not doc["factors"]:
        raise SchemaError("'factors' must be a nonempty list")
    factors = tuple(_parse_factor(f, kind) for f in doc["factors"])
    block = _parse_block(doc, kind)
    groups = doc.get("groups", [])
    if not isinstance(groups, list) or not all(isinstance(g, str) and g for g in groups):
        raise SchemaError("'groups' must be a list of column names", value=groups)
    spec = DesignSpec(
        kind=kind,
        response=response,
        treatment_factors=factors,
        block_factor=block,
        group_factors=tuple(groups),
        alpha=_parse_probability(doc, "alpha"),
        alpha_v=_parse_probability(doc, "alpha_v"),
    )
    _check_kind_invariants(spec)
    return spec


def design_from_document(doc: dict) -> DesignSpec:
    """Parse a design given as an already-decoded mapping."""
    return parse_design(json.dumps(doc))


def compile_effects(spec: DesignSpec) -> EffectSet:
    """Compile the canonical effect list and stratum map for a design.

    The effect ordering fixes the ANOVA row ordering; it is a pure function
    of the spec. Every effect's denominator names a stratum present in the
    returned stratum list.
    """
    kind = spec.kind
    residual = Stratum(RESIDUAL, None)

    if kind == "crd":
        t = spec.treatment_factors[0]
        effects = (Effect((t.name,), t.role, RESIDUAL),)
        return EffectSet(effects, (residual,))

    if kind in ("rcbd", "mixed"):
        t = spec.treatment_factors[0]
        b = spec.block_factor
        effects = (
            Effect((t.name,), t.role, RESIDUAL),
            Effect((b.name,), b.role, RESIDUAL),
        )
        return EffectSet(effects, (residual,))

    if kind == "factorial":
        names = [f.name for f in spec.treatment_factors]
        roles = {f.name: f.role for f in spec.treatment_factors}
        effects = []
        for order in range(1, len(names) + 1):
            for combo in itertools.combinations(range(len(names)), order):
                fs = tuple(names[i] for i in combo)
                role = "random" if any(roles[n] == "random" for n in fs) else "fixed"
                effects.append(Effect(fs, role, RESIDUAL))
        return EffectSet(tuple(effects), (residual,))

    if kind == "split_plot":
        wp = spec.whole_plot_factor()
        sp = spec.sub_plot_factor()
        b = spec.block_factor
        wp_stratum = Stratum(WHOLE_PLOT_ERROR, (b.name, wp.name))
        effects = (
            Effect((b.name,), b.role, WHOLE_PLOT_ERROR),
            Effect((wp.name,), wp.role, WHOLE_PLOT_ERROR),
            Effect((sp.name,), sp.role, RESIDUAL),
            Effect((b.name, wp.name), b.role, RESIDUAL),
            Effect((wp.name, sp.name), wp.role, RESIDUAL),
        )
        return EffectSet(effects, (wp_stratum, residual))

    if kind == "met":
        g = spec.genotype_factor()
        e = spec.environment_factor()
        effects = (
            Effect((g.name,), g.role, RESIDUAL),
            Effect((e.name,), e.role, RESIDUAL),
            Effect((g.name, e.name), "random", RESIDUAL),
        )
        return EffectSet(effects, (residual,))

    raise ConstraintError(f"unknown design kind '{kind}'")  # pragma: no cover


def validate_against_data(spec: DesignSpec, data: Dataset) -> ValidatedDesign:
    """Check a dataset against a design; returns levels and replication.

    Requires: every declared factor present with >= 2 levels, a numeric
    response, and a fully balanced layout (every full-factorial cell of the
    declared factors observed the same number of times).
    """
    for name in spec.factor_names() + spec.group_factors:
        if not data.has_column(name):
            raise MissingColumn(f"declared factor '{name}' not found in data", column=name)
    if not data.has_column(spec.response):
        raise MissingColumn(f"response '{spec.response}' not found in data",
                            column=spec.response)
    if not data.is_numeric(spec.response):
        raise NonNumericResponse(
            f"response column '{spec.response}' contains non-numeric values",
            column=spec.response)

    levels = {name: data.levels(name) for name in spec.factor_names()}
    for name, lv in levels.items():
        if len(lv) < 2:
            raise InsufficientLevels(
                f"factor '{name}' has {len(lv)} level(s); at least 2 required",
                column=name, levels=list(lv))

    factor_names = spec.factor_names()
    cols = [data.column(name) for name in factor_names]
    counts: dict[tuple[str, ...], int] = {}
    for i in range(data.n_rows):
        key = tuple(col[i] for col in cols)
        counts[key] = counts.get(key, 0) + 1

    expected_cells = 1
    for lv in levels.values():
        expected_cells *= len(lv)
    first_key = next(iter(counts))
    r = counts[first_key]

    def cell_label(key):
        return ", ".join(f"{f}={v}" for f, v in zip(factor_names, key))

    for key, count in counts.items():
        if count != r:
            raise UnbalancedDesign(
                f"cell {cell_label(key)} has {count} observation(s), expected {r}",
                cell=dict(zip(factor_names, key)), observed=count, expected=r)
    if len(counts) != expected_cells:
        for combo in itertools.product(*(levels[f] for f in factor_names)):
            if combo not in counts:
                raise UnbalancedDesign(
                    f"cell {cell_label(combo)} has 0 observations, expected {r}",
                    cell=dict(zip(factor_names, combo)), observed=0, expected=r)
    if data.n_rows != expected_cells * r:  # pragma: no cover - implied by the above
        raise UnbalancedDesign("row count inconsistent with cell structure")

    return ValidatedDesign(spec=spec, levels=levels, replicates=r, n_rows=data.n_rows)
