"""Bundled tutorial datasets, one per canonical design kind.

Each fixture is generated from fixed cell means plus a fixed residual
pattern, chosen so the analysis of each dataset is exactly reproducible and
the classical mean-square arithmetic works out to short decimals. The
residual patterns are orthogonal to every model term by construction (zero
sums over the relevant margins), so the closed-form fit returns them
unchanged.
"""

from __future__ import annotations

from fractions import Fraction

from .data import Dataset, from_columns

# crd: 4 fertilizer levels x 5 reps around a grand mean of 50
_CRD_LEVELS = ("Control", "NPK50", "NPK75", "NPK100")
_CRD_DEVS = (-10, -3, 3, 10)
_CRD_RESID = (-2, -1, 0, 1, 2)

# rcbd: 4 varieties x 4 blocks, one observation per cell
_RCBD_VAR = ("V1", "V2", "V3", "V4")
_RCBD_VDEV = (-6.0, -2.0, 2.0, 6.0)
_RCBD_BLOCKS = ("B1", "B2", "B3", "B4")
_RCBD_BDEV = (-1.25, -0.75, 0.75, 1.25)
_RCBD_RESID = (  # variety x block, quarter units, zero row/col sums
    (-0.25, 0.25, -0.25, 0.25),
    (0.25, -0.25, -0.25, 0.25),
    (0.75, -0.75, 0.25, -0.25),
    (-0.75, 0.75, 0.25, -0.25),
)

# factorial: 3 nitrogen x 2 spacing x 3 reps
_FACT_N = ("Low", "Medium", "High")
_FACT_NDEV = (-8.5, 0.0, 8.5)
_FACT_S = ("Narrow", "Wide")
_FACT_SDEV = (-2.5, 2.5)
_FACT_NS = ((0.5, -0.5), (-0.5, 0.5), (0.0, 0.0))
_FACT_RESID = (-1.0, 0.0, 1.0)

# split plot: 3 blocks x 3 irrigation (whole plot) x 3 varieties (sub plot),
# expressed in ninths/thirds so the mean squares come out in ninths
_SP_BLOCKS = ("B1", "B2", "B3")
_SP_BDEV = (Fraction(-9, 9), Fraction(1, 9), Fraction(8, 9))
_SP_IRR = ("I1", "I2", "I3")
_SP_ADEV = (Fraction(-77, 9), Fraction(4, 9), Fraction(73, 9))
_SP_VAR = ("V1", "V2", "V3")
_SP_VDEV = (Fraction(-29, 9), Fraction(1, 9), Fraction(28, 9))
_SP_BA = (  # block x irrigation (whole-plot error pattern)
    (Fraction(1, 9), Fraction(1, 9), Fraction(-2, 9)),
    (Fraction(-1, 9), Fraction(-1, 9), Fraction(2, 9)),
    (Fraction(0), Fraction(0), Fraction(0)),
)
_SP_AV = (  # irrigation x variety
    (Fraction(2, 3), Fraction(-2, 3), Fraction(0)),
    (Fraction(-2, 3), Fraction(2, 3), Fraction(0)),
    (Fraction(0), Fraction(0), Fraction(0)),
)
_SP_RES_BLOCK = (1, -1, 0)
_SP_RES_IV = (
    (Fraction(1, 3), Fraction(-1, 3), Fraction(0)),
    (Fraction(-1, 3), Fraction(0), Fraction(1, 3)),
    (Fraction(0), Fraction(1, 3), Fraction(-1, 3)),
)

# lmm: 3 treatments x 4 random blocks, tenth units
_LMM_TREAT = ("T1", "T2", "T3")
_LMM_TDEV = (-6.5, 0.0, 6.5)
_LMM_BLOCKS = ("B1", "B2", "B3", "B4")
_LMM_BDEV = (-1.4, -0.3, 0.3, 1.4)
_LMM_RES_T = (1, -1, 0)
_LMM_RES_B = (-0.1, -0.7, -0.1, 0.9)

# gxe: 4 genotypes x 4 environments x 2 reps, sixteenth units
_GXE_G = ("G1", "G2", "G3", "G4")
_GXE_GDEV = (Fraction(-129, 16), Fraction(-37, 16), Fraction(43, 16), Fraction(123, 16))
_GXE_E = ("E1", "E2", "E3", "E4")
_GXE_EDEV = (Fraction(-45, 16), Fraction(-13, 16), Fraction(19, 16), Fraction(39, 16))
_GXE_U = (1, -1, 0, 0)
_GXE_V = (Fraction(-10, 16), Fraction(-6, 16), Fraction(8, 16), Fraction(8, 16))
# per-cell half-gap of the duplicate pair, row-major over (genotype,
# environment); rows carry near-equal squared totals so per-genotype spread
# stays homogeneous
_GXE_DELTAS = (
    Fraction(16, 16), Fraction(0, 16), Fraction(1, 16), Fraction(2, 16),
    Fraction(16, 16), Fraction(1, 16), Fraction(1, 16), Fraction(2, 16),
    Fraction(14, 16), Fraction(5, 16), Fraction(3, 16), Fraction(2, 16),
    Fraction(11, 16), Fraction(9, 16), Fraction(8, 16), Fraction(1, 16),
)


def _crd() -> Dataset:
    treat, yield_ = [], []
    for level, dev in zip(_CRD_LEVELS, _CRD_DEVS):
        for r in _CRD_RESID:
            treat.append(level)
            yield_.append(float(50 + dev + r))
    return from_columns(["Fertilizer", "Yield"], [treat, yield_])


def _rcbd() -> Dataset:
    var, block, yield_ = [], [], []
    for i, v in enumerate(_RCBD_VAR):
        for j, b in enumerate(_RCBD_BLOCKS):
            var.append(v)
            block.append(b)
            yield_.append(50.0 + _RCBD_VDEV[i] + _RCBD_BDEV[j] + _RCBD_RESID[i][j])
    return from_columns(["Variety", "Block", "Yield"], [var, block, yield_])


def _factorial() -> Dataset:
    nit, spc, yield_ = [], [], []
    for i, n in enumerate(_FACT_N):
        for j, s in enumerate(_FACT_S):
            for r in _FACT_RESID:
                nit.append(n)
                spc.append(s)
                yield_.append(30.0 + _FACT_NDEV[i] + _FACT_SDEV[j] + _FACT_NS[i][j] + r)
    return from_columns(["Nitrogen", "Spacing", "Yield"], [nit, spc, yield_])


def _split_plot() -> Dataset:
    block, irr, var, yield_ = [], [], [], []
    for k, b in enumerate(_SP_BLOCKS):
        for i, a in enumerate(_SP_IRR):
            for j, v in enumerate(_SP_VAR):
                cell = (Fraction(20) + _SP_BDEV[k] + _SP_ADEV[i] + _SP_BA[k][i]
                        + _SP_VDEV[j] + _SP_AV[i][j]
                        + _SP_RES_BLOCK[k] * _SP_RES_IV[i][j])
                block.append(b)
                irr.append(a)
                var.append(v)
                yield_.append(float(cell))
    return from_columns(["Block", "Irrigation", "Variety", "Yield"],
                        [block, irr, var, yield_])


def _lmm() -> Dataset:
    treat, block, yield_ = [], [], []
    for i, t in enumerate(_LMM_TREAT):
        for j, b in enumerate(_LMM_BLOCKS):
            treat.append(t)
            block.append(b)
            yield_.append(48.0 + _LMM_TDEV[i] + _LMM_BDEV[j]
                          + _LMM_RES_T[i] * _LMM_RES_B[j])
    return from_columns(["Treatment", "Block", "Yield"], [treat, block, yield_])


def _gxe() -> Dataset:
    gen, env, yield_ = [], [], []
    for i, g in enumerate(_GXE_G):
        for j, e in enumerate(_GXE_E):
            cell = (Fraction(50) + _GXE_GDEV[i] + _GXE_EDEV[j]
                    + _GXE_U[i] * _GXE_V[j])
            delta = _GXE_DELTAS[i * 4 + j]
            for signed in (cell + delta, cell - delta):
                gen.append(g)
                env.append(e)
                yield_.append(float(signed))
    return from_columns(["Genotype", "Environment", "Yield"], [gen, env, yield_])


_BUILDERS = {
    "crd": _crd,
    "rcbd": _rcbd,
    "factorial": _factorial,
    "split_plot": _split_plot,
    "lmm": _lmm,
    "gxe": _gxe,
}

# design documents matching the fixtures, usable directly by the CLI
DESIGN_DOCUMENTS = {
    "crd": {
        "kind": "crd",
        "response": "Yield",
        "factors": [{"name": "Fertilizer"}],
    },
    "rcbd": {
        "kind": "rcbd",
        "response": "Yield",
        "factors": [{"name": "Variety"}],
        "block": "Block",
    },
    "factorial": {
        "kind": "factorial",
        "response": "Yield",
        "factors": [{"name": "Nitrogen"}, {"name": "Spacing"}],
    },
    "split_plot": {
        "kind": "split_plot",
        "response": "Yield",
        "factors": [
            {"name": "Irrigation", "stratum": "whole_plot"},
            {"name": "Variety", "stratum": "sub_plot"},
        ],
        "block": "Block",
    },
    "lmm": {
        "kind": "mixed",
        "response": "Yield",
        "factors": [{"name": "Treatment"}],
        "block": "Block",
    },
    "gxe": {
        "kind": "met",
        "response": "Yield",
        "factors": [
            {"name": "Genotype"},
            {"name": "Environment", "role": "random"},
        ],
    },
}


def build(name: str) -> Dataset:
    return _BUILDERS[name]()
