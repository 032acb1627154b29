"""Model families: structural equations, outcome enumeration, D_t inverses.

Seven families share one interface.  For each discrete family the period-t
structural relation is a conjunction of linear relations linking the
unit-level latents (a scalar shift ``c``, or per-equation shifts ``v1, v2``)
to the time-varying latent ``u_t``.  ``dt_inverse`` materializes that
conjunction as a :class:`~panelbounds.polyhedra.LinIneqSystem`; intersecting
over periods and eliminating the unit-level latents yields the u-compatible
set attached to an outcome sequence (see :mod:`panelbounds.randomsets`).

Structural coefficients enter only through per-period linear expressions, so
the same code runs with exact numeric parameters or with named symbolic
parameters (used for table generation and sign-regime computations).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .polyhedra import (
    LinExpr,
    LinIneq,
    LinIneqSystem,
    eq,
    ge,
    le,
    merge_coords,
    system,
)

FAMILIES = (
    "linear",
    "binary_static",
    "binary_dynamic",
    "ordered",
    "multidiscrete",
    "simultaneous_binary",
    "censored",
)

DISCRETE_FAMILIES = (
    "binary_static",
    "binary_dynamic",
    "ordered",
    "multidiscrete",
    "simultaneous_binary",
)


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _fr_tuple(xs) -> tuple[Fraction, ...]:
    return tuple(_fr(x) for x in xs)


@dataclass(frozen=True)
class ModelSpec:
    """Family, horizon, initial-condition status, and sign regime."""

    family: str
    T: int = 2
    y0_status: str = "absent"  # absent | observed | unobserved
    dim_z: int = 1
    n_choices: int = 2
    sign_restrictions: tuple[str, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.T < 2:
            raise ValueError("need at least two periods")
        if self.T > 9:
            raise ValueError("horizons above 9 periods are not supported")
        if self.y0_status not in ("absent", "observed", "unobserved"):
            raise ValueError(f"bad y0_status {self.y0_status!r}")
        dynamic = self.family in ("binary_dynamic", "censored") or (
            self.family == "ordered" and any(s.startswith("g") for s in self.sign_restrictions)
        )
        if self.family in ("binary_static", "multidiscrete", "simultaneous_binary"):
            if self.y0_status != "absent":
                raise ValueError("static families have no initial condition")
        if self.family == "binary_dynamic" and self.y0_status == "absent":
            raise ValueError("dynamic binary response needs an initial-condition status")
        if self.family in ("ordered", "multidiscrete") and self.n_choices < 2:
            raise ValueError("need at least two choices")
        if self.dim_z < 1:
            raise ValueError("dim_z must be positive")

    @property
    def is_dynamic(self) -> bool:
        return self.family in ("binary_dynamic",) or (
            self.family in ("ordered", "censored") and self.y0_status != "absent"
        )

    @property
    def n_equations(self) -> int:
        if self.family == "simultaneous_binary":
            return 2
        if self.family == "multidiscrete":
            return self.n_choices  # one latent series per alternative
        return 1

    def gamma_regime(self) -> str:
        for s in self.sign_restrictions:
            if s in ("gamma>0", "gamma<0", "gamma=0"):
                return s
        return ""

    @staticmethod
    def from_dict(d: dict) -> "ModelSpec":
        allowed = {"family", "T", "y0_status", "dim_z", "n_choices", "sign_restrictions"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown ModelSpec keys: {sorted(unknown)}")
        d = dict(d)
        if "sign_restrictions" in d:
            d["sign_restrictions"] = tuple(d["sign_restrictions"])
        return ModelSpec(**d)


@dataclass(frozen=True)
class Theta:
    """Structural parameter value.

    ``beta`` is a single coefficient vector, or a pair of vectors for the
    multiple-discrete and simultaneous families.  ``gamma`` is a scalar lag
    coefficient, or one scalar per lagged outcome level for the general
    ordered model.  ``cuts`` are the strictly increasing ordered-response
    thresholds.
    """

    alpha: tuple[Fraction, ...] = ()
    beta: tuple = ()
    gamma: tuple[Fraction, ...] = ()
    cuts: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", _fr_tuple(self.alpha))
        if self.beta and isinstance(self.beta[0], (tuple, list)):
            object.__setattr__(self, "beta", tuple(_fr_tuple(b) for b in self.beta))
        else:
            object.__setattr__(self, "beta", _fr_tuple(self.beta))
        object.__setattr__(self, "gamma", _fr_tuple(self.gamma))
        object.__setattr__(self, "cuts", _fr_tuple(self.cuts))
        if any(a >= b for a, b in zip(self.cuts, self.cuts[1:])):
            raise ValueError("cuts must be strictly increasing")

    def gamma_scalar(self) -> Fraction:
        return self.gamma[0] if self.gamma else Fraction(0)

    def validate_for(self, model: ModelSpec) -> "Theta":
        if model.family in ("multidiscrete", "simultaneous_binary"):
            if len(self.beta) != 2 or not isinstance(self.beta[0], tuple):
                raise ValueError("this family takes two beta vectors")
            for b in self.beta:
                if len(b) != model.dim_z:
                    raise ValueError("beta length must equal dim_z")
        elif model.family != "linear":
            if self.beta and isinstance(self.beta[0], tuple):
                raise ValueError("this family takes a single beta vector")
            if len(self.beta) != model.dim_z:
                raise ValueError("beta length must equal dim_z")
        if model.family == "ordered":
            if len(self.cuts) != model.n_choices - 1:
                raise ValueError("need n_choices-1 cut points")
        if model.family == "simultaneous_binary" and len(self.alpha) != 2:
            raise ValueError("the simultaneous family takes alpha = (alpha1, alpha2)")
        if model.family in ("binary_static", "binary_dynamic", "censored") and len(self.alpha) > 1:
            raise ValueError("at most one endogenous-regressor coefficient here")
        for restriction in model.sign_restrictions:
            if not _sign_ok(restriction, self):
                raise ValueError(f"theta violates sign restriction {restriction!r}")
        return self

    @staticmethod
    def from_dict(d: dict) -> "Theta":
        allowed = {"alpha", "beta", "gamma", "cuts"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown Theta keys: {sorted(unknown)}")
        kw = {}
        for key in allowed & set(d):
            val = d[key]
            if not isinstance(val, (list, tuple)):
                val = [val]
            if key == "beta" and val and isinstance(val[0], (list, tuple)):
                kw[key] = tuple(tuple(Fraction(str(x)) for x in v) for v in val)
            else:
                kw[key] = tuple(Fraction(str(x)) for x in val)
        return Theta(**kw)


def _sign_ok(restriction: str, theta: Theta) -> bool:
    g = theta.gamma_scalar()
    table = {
        "gamma>0": g > 0,
        "gamma<0": g < 0,
        "gamma=0": g == 0,
        "alpha1>=0": not theta.alpha or theta.alpha[0] >= 0,
        "alpha2>=0": len(theta.alpha) < 2 or theta.alpha[1] >= 0,
        "alpha1>0": bool(theta.alpha) and theta.alpha[0] > 0,
        "alpha2>0": len(theta.alpha) > 1 and theta.alpha[1] > 0,
    }
    if restriction not in table:
        raise ValueError(f"unknown sign restriction {restriction!r}")
    return table[restriction]


@dataclass(frozen=True)
class OutcomeSeq:
    """One outcome path.  ``y`` is the per-period code vector (flattened
    ``(y11..y1T, y21..y2T)`` for the simultaneous family).  The censored
    family stores the censoring pattern ``w`` and, when levels matter, the
    observed ``y1/y2/y3`` values.
    """

    y: tuple[int, ...] = ()
    y0: Optional[int] = None
    w: Optional[tuple[int, ...]] = None
    y1vals: Optional[tuple] = None
    y2vals: Optional[tuple] = None
    y3vals: Optional[tuple] = None

    def with_y0(self, y0: int) -> "OutcomeSeq":
        return OutcomeSeq(self.y, y0, self.w, self.y1vals, self.y2vals, self.y3vals)

    def label(self) -> str:
        if self.w is not None and not self.y:
            return "w=" + "".join(str(b) for b in self.w)
        return "(" + ",".join(str(v) for v in self.y) + ")"


@dataclass(frozen=True)
class CovariateCell:
    """A discrete covariate configuration: one z path per period (and, when
    the family has an endogenous regressor, its per-period values)."""

    z: tuple[tuple[Fraction, ...], ...]
    cell_id: int = 0
    y2: Optional[tuple[Fraction, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(_fr_tuple(row) for row in self.z))
        if self.y2 is not None:
            object.__setattr__(self, "y2", _fr_tuple(self.y2))
        for row in self.z:
            for v in row:
                if not isinstance(v, Fraction):
                    raise ValueError("non-finite covariate entry")

    @staticmethod
    def scalar(zs: Sequence, cell_id: int = 0, y2: Optional[Sequence] = None) -> "CovariateCell":
        return CovariateCell(tuple((z,) for z in zs), cell_id, tuple(y2) if y2 is not None else None)


# ---------------------------------------------------------------------------
# Structural index: per-period linear expressions in the latents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructuralIndex:
    """Per-period deterministic index pieces, as linear expressions.

    ``zb[k][t]`` is the period-t covariate index of equation ``k`` (a single
    equation for the one-series families).  ``alpha``, ``gamma`` and ``cuts``
    are expressions so that symbolic parameters flow through unchanged.
    """

    model: ModelSpec
    zb: tuple[tuple[LinExpr, ...], ...]
    alpha: tuple[LinExpr, ...]
    gamma: tuple[LinExpr, ...]
    cuts: tuple[LinExpr, ...]
    y2: Optional[tuple] = None  # numeric endogenous-regressor path, if any

    @staticmethod
    def numeric(model: ModelSpec, theta: Theta, cell: CovariateCell) -> "StructuralIndex":
        theta.validate_for(model)
        if len(cell.z) != model.T:
            raise ValueError("covariate path length must equal T")
        betas: tuple
        if model.family in ("multidiscrete", "simultaneous_binary"):
            betas = theta.beta
        else:
            betas = (theta.beta,)
        zb = tuple(
            tuple(
                LinExpr.const_(sum((zz * bb for zz, bb in zip(zrow, b)), Fraction(0)))
                for zrow in cell.z
            )
            for b in betas
        )
        if model.family == "multidiscrete":
            # alternative K is the normalized outside option: zero index
            zb = zb + (tuple(LinExpr.const_(0) for _ in range(model.T)),)
        return StructuralIndex(
            model=model,
            zb=zb,
            alpha=tuple(LinExpr.const_(a) for a in theta.alpha),
            gamma=tuple(LinExpr.const_(g) for g in theta.gamma),
            cuts=tuple(LinExpr.const_(c) for c in theta.cuts),
            y2=cell.y2,
        )

    def lag_term(self, lag_outcome) -> LinExpr:
        """γ-contribution of the lagged outcome (scalar lag, or per-level)."""
        if not self.gamma:
            return LinExpr.const_(0)
        if len(self.gamma) == 1:
            return self.gamma[0] * int(lag_outcome)
        return self.gamma[int(lag_outcome)]

    def alpha_term(self, t: int, eq_idx: int = 0) -> LinExpr:
        if not self.alpha:
            return LinExpr.const_(0)
        if self.y2 is None:
            raise ValueError("endogenous-regressor values missing from the cell")
        return self.alpha[eq_idx] * self.y2[t]


# ---------------------------------------------------------------------------
# Coordinate layout
# ---------------------------------------------------------------------------


def latent_coords(model: ModelSpec) -> tuple[str, ...]:
    if model.family == "multidiscrete":
        return tuple(f"v{d}" for d in range(1, model.n_choices))
    if model.family == "simultaneous_binary":
        return ("v1", "v2")
    if model.family == "censored" and model.y0_status == "unobserved":
        return ("c", "y10")
    return ("c",)


def u_level_coords(model: ModelSpec) -> tuple[str, ...]:
    T = model.T
    if model.family == "multidiscrete":
        return tuple(f"u{d}p{t}" for d in range(1, model.n_choices + 1) for t in range(1, T + 1))
    if model.family == "simultaneous_binary":
        return tuple(f"u{j}p{t}" for j in (1, 2) for t in range(1, T + 1))
    return tuple(f"u{t}" for t in range(1, T + 1))


def delta_coords(model: ModelSpec) -> tuple[str, ...]:
    """Differenced-u coordinates: common level shifts are absorbed by the
    unit-level latents, so every u-compatible set lives here."""
    T = model.T
    if model.family in ("multidiscrete", "simultaneous_binary"):
        n_series = model.n_choices if model.family == "multidiscrete" else 2
        if T == 2:
            return tuple(f"du{d}" for d in range(1, n_series + 1))
        return tuple(f"du{d}_{t}" for d in range(1, n_series + 1) for t in range(2, T + 1))
    return tuple(f"du{t}1" for t in range(2, T + 1))


def delta_map(model: ModelSpec) -> dict[str, tuple[str, Optional[str]]]:
    """u-level coordinate -> (series key, delta coordinate or None for the anchor)."""
    T = model.T
    out: dict[str, tuple[str, Optional[str]]] = {}
    if model.family in ("multidiscrete", "simultaneous_binary"):
        n_series = model.n_choices if model.family == "multidiscrete" else 2
        for d in range(1, n_series + 1):
            for t in range(1, T + 1):
                name = None if t == 1 else (f"du{d}" if T == 2 else f"du{d}_{t}")
                out[f"u{d}p{t}"] = (f"s{d}", name)
    else:
        for t in range(1, T + 1):
            out[f"u{t}"] = ("s", None if t == 1 else f"du{t}1")
    return out


def to_delta_coordinates(model: ModelSpec, sys_: LinIneqSystem) -> LinIneqSystem:
    """Rewrite u-level rows in differenced coordinates.

    Valid whenever each row's u coefficients sum to zero within every latent
    series, which holds for all families after the unit-level latents are
    eliminated.
    """
    from .polyhedra import make_row

    dmap = delta_map(model)
    new_rows: list[LinIneq] = []
    for r in sys_.rows:
        terms: list[tuple[str, Fraction]] = []
        series_sums: dict[str, Fraction] = {}
        for k, v in r.terms:
            if k in dmap:
                series, dname = dmap[k]
                series_sums[series] = series_sums.get(series, Fraction(0)) + v
                if dname is not None:
                    terms.append((dname, v))
            else:
                terms.append((k, v))
        if any(s != 0 for s in series_sums.values()):
            raise ValueError("system is not shift-invariant; cannot express in differences")
        new_rows.append(make_row(terms, r.rel, r.rhs))
    coords = tuple(c for c in sys_.coords if c not in dmap)
    coords = merge_coords(delta_coords(model), coords)
    return system(coords, new_rows)


# ---------------------------------------------------------------------------
# Outcome enumeration
# ---------------------------------------------------------------------------


def enumerate_outcomes(model: ModelSpec) -> list[OutcomeSeq]:
    """Complete outcome list, lexicographic.  The censored family enumerates
    censoring patterns only; the linear family has no discrete outcomes."""
    T = model.T
    if model.family == "linear":
        raise ValueError("continuous outcome: the linear family has no finite outcome list")
    if model.family in ("binary_static", "binary_dynamic"):
        return [OutcomeSeq(y) for y in itertools.product((0, 1), repeat=T)]
    if model.family == "ordered":
        levels = range(model.n_choices)
        return [OutcomeSeq(y) for y in itertools.product(levels, repeat=T)]
    if model.family == "multidiscrete":
        choices = range(1, model.n_choices + 1)
        return [OutcomeSeq(y) for y in itertools.product(choices, repeat=T)]
    if model.family == "simultaneous_binary":
        # flattened (y1 path, y2 path), enumerated lexicographically
        out = []
        for bits in itertools.product((0, 1), repeat=2 * T):
            out.append(OutcomeSeq(tuple(bits)))
        return out
    if model.family == "censored":
        return [OutcomeSeq((), w=w) for w in itertools.product((0, 1), repeat=T)]
    raise AssertionError


def y0_branches(model: ModelSpec, outcome: OutcomeSeq) -> list[Optional[int]]:
    """Feasible initial-condition values to search over."""
    if model.family == "ordered" and model.y0_status == "unobserved":
        return list(range(model.n_choices))
    if model.y0_status == "unobserved":
        if model.family == "censored":
            return [None]  # continuous initial level: eliminated as a coordinate
        return [0, 1]
    if model.y0_status == "observed":
        if outcome.y0 is None:
            raise ValueError("y0 is observed but missing from the outcome")
        return [outcome.y0]
    return [None]


# ---------------------------------------------------------------------------
# D_t inverses
# ---------------------------------------------------------------------------


def dt_inverse(
    model: ModelSpec,
    idx: StructuralIndex,
    t: int,
    outcome: OutcomeSeq,
    y0_branch: Optional[int] = None,
) -> LinIneqSystem:
    """The period-t set of unit-level latent values consistent with the data.

    Linear relations over the latent coordinates and ``u_t`` (per series).
    ``t`` is 1-based.  For dynamic families the period-1 lag is the branch
    value (observed or hypothesized initial condition).
    """
    if not 1 <= t <= model.T:
        raise ValueError(f"period {t} out of range")
    fam = model.family
    base_coords = latent_coords(model) + u_level_coords(model)

    def _dt_system(rows):
        extra = [k for r in rows for k, _ in r.terms if k not in base_coords]
        return system(merge_coords(base_coords, extra), rows)

    if fam in ("binary_static", "binary_dynamic"):
        y = outcome.y[t - 1]
        lag = _lag_value(model, outcome, t, y0_branch)
        index = (
            idx.alpha_term(t - 1) if idx.alpha else LinExpr.const_(0)
        ) + idx.zb[0][t - 1] + idx.lag_term(lag)
        c = LinExpr.coord("c")
        u = LinExpr.coord(f"u{t}")
        row = ge(index + c + u, 0) if y == 1 else le(index + c + u, 0)
        return _dt_system([row])

    if fam == "ordered":
        y = outcome.y[t - 1]
        lag = _lag_value(model, outcome, t, y0_branch)
        index = idx.zb[0][t - 1] + (idx.lag_term(lag) if model.y0_status != "absent" else LinExpr.const_(0))
        c = LinExpr.coord("c")
        u = LinExpr.coord(f"u{t}")
        rows = []
        if y >= 1:
            rows.append(ge(index + c + u, idx.cuts[y - 1]))
        if y <= model.n_choices - 2:
            rows.append(le(index + c + u, idx.cuts[y]))
        return _dt_system(rows)

    if fam == "multidiscrete":
        chosen = outcome.y[t - 1]
        rows = []
        for other in range(1, model.n_choices + 1):
            if other == chosen:
                continue
            rows.append(ge(_mdc_utility(model, idx, chosen, t) - _mdc_utility(model, idx, other, t), 0))
        return _dt_system(rows)

    if fam == "simultaneous_binary":
        T = model.T
        y1, y2 = outcome.y[t - 1], outcome.y[T + t - 1]
        rows = []
        for j, (own, partner) in enumerate(((y1, y2), (y2, y1)), start=1):
            index = idx.alpha[j - 1] * partner + idx.zb[j - 1][t - 1]
            expr = index + LinExpr.coord(f"v{j}") + LinExpr.coord(f"u{j}p{t}")
            rows.append(ge(expr, 0) if own == 1 else le(expr, 0))
        return _dt_system(rows)

    if fam == "censored":
        w = outcome.w[t - 1]
        index = (
            (idx.alpha_term(t - 1) if idx.alpha else LinExpr.const_(0))
            + idx.zb[0][t - 1]
            + _censored_lag_expr(model, idx, outcome, t)
        )
        c = LinExpr.coord("c")
        u = LinExpr.coord(f"u{t}")
        y1t = LinExpr.const_(_fr(outcome.y1vals[t - 1]))
        if w == 0:
            return _dt_system([eq(c, y1t - index - u)])
        return _dt_system([le(c, y1t - index - u)])

    raise ValueError(f"no D_t inverse for family {fam!r}")


def _lag_value(model: ModelSpec, outcome: OutcomeSeq, t: int, y0_branch) -> int:
    if model.family in ("binary_static", "multidiscrete", "simultaneous_binary"):
        return 0
    if model.family == "ordered" and model.y0_status == "absent":
        return 0
    if t == 1:
        if y0_branch is None:
            raise ValueError("dynamic model needs an initial-condition branch")
        return y0_branch
    return outcome.y[t - 2]


def _censored_lag_expr(model: ModelSpec, idx: StructuralIndex, outcome: OutcomeSeq, t: int) -> LinExpr:
    """gamma * (lagged level); the unobserved initial level is a coordinate."""
    if model.y0_status == "absent" or not idx.gamma:
        return LinExpr.const_(0)
    g = idx.gamma[0]
    if t > 1:
        return g * _fr(outcome.y1vals[t - 2])
    if model.y0_status == "observed":
        if outcome.y0 is None:
            raise ValueError("observed initial level missing from the outcome")
        return g * _fr(outcome.y0)
    if g.coeffs:
        raise ValueError("unobserved censored initial level needs a numeric gamma")
    return LinExpr({"y10": g.const})


def _mdc_utility(model: ModelSpec, idx: StructuralIndex, d: int, t: int) -> LinExpr:
    expr = idx.zb[d - 1][t - 1] + LinExpr.coord(f"u{d}p{t}")
    if d < model.n_choices:
        expr = expr + LinExpr.coord(f"v{d}")
    return expr


# ---------------------------------------------------------------------------
# Forward simulation and structural residual
# ---------------------------------------------------------------------------


def simulate_outcome(
    model: ModelSpec,
    idx: StructuralIndex,
    u,
    v,
    y0=None,
    tie_high: bool = True,
    selection: str = "max",
    y3=None,
):
    """Roll the structural equations forward.  ``u`` is the per-period latent
    matrix (series x T for multi-series families), ``v`` the unit latents.

    Ties at the index boundary go to the high outcome when ``tie_high``;
    the simultaneous family resolves equilibrium multiplicity with
    ``selection`` ("max" or "min" in the componentwise order).
    """
    T = model.T
    fam = model.family

    def fl(x: LinExpr) -> float:
        if x.coeffs:
            raise ValueError("cannot simulate from symbolic parameters")
        return float(x.const)

    if fam in ("binary_static", "binary_dynamic"):
        c = float(v[0])
        lag = int(y0) if y0 is not None else 0
        ys = []
        for t in range(T):
            index = (
                (fl(idx.alpha[0]) * float(idx.y2[t]) if idx.alpha else 0.0)
                + fl(idx.zb[0][t])
                + fl(idx.lag_term(lag))
                + c
                + float(u[t])
            )
            y = int(index > 0 or (index == 0 and tie_high))
            ys.append(y)
            lag = y
        return tuple(ys)

    if fam == "ordered":
        c = float(v[0])
        lag = int(y0) if y0 is not None else 0
        cuts = [fl(x) for x in idx.cuts]
        ys = []
        for t in range(T):
            index = fl(idx.zb[0][t]) + (
                fl(idx.lag_term(lag)) if model.y0_status != "absent" else 0.0
            ) + c + float(u[t])
            if tie_high:
                y = sum(index >= cut for cut in cuts)
            else:
                y = sum(index > cut for cut in cuts)
            ys.append(y)
            lag = y
        return tuple(ys)

    if fam == "multidiscrete":
        K = model.n_choices
        ys = []
        for t in range(T):
            utils = []
            for d in range(1, K + 1):
                val = fl(idx.zb[d - 1][t]) + float(u[d - 1][t])
                if d < K:
                    val += float(v[d - 1])
                utils.append(val)
            best = max(utils)
            winners = [d for d, x in enumerate(utils, start=1) if x == best]
            ys.append(max(winners) if tie_high else min(winners))
        return tuple(ys)

    if fam == "simultaneous_binary":
        v1, v2 = float(v[0]), float(v[1])
        y1s, y2s = [], []
        for t in range(T):
            feasible = []
            for cand1, cand2 in ((0, 0), (0, 1), (1, 0), (1, 1)):
                i1 = fl(idx.alpha[0]) * cand2 + fl(idx.zb[0][t]) + v1 + float(u[0][t])
                i2 = fl(idx.alpha[1]) * cand1 + fl(idx.zb[1][t]) + v2 + float(u[1][t])
                ok1 = i1 >= 0 if cand1 == 1 else i1 <= 0
                ok2 = i2 >= 0 if cand2 == 1 else i2 <= 0
                if ok1 and ok2:
                    feasible.append((cand1, cand2))
            if not feasible:
                raise RuntimeError("no pure equilibrium at this draw (outside the supported regime)")
            pick = max(feasible) if selection == "max" else min(feasible)
            y1s.append(pick[0])
            y2s.append(pick[1])
        return tuple(y1s) + tuple(y2s)

    if fam == "censored":
        c = float(v[0])
        lag = float(y0) if y0 is not None else 0.0
        thresholds = [0.0] * T if y3 is None else [float(x) for x in y3]
        y1s, ws = [], []
        g = fl(idx.gamma[0]) if idx.gamma else 0.0
        for t in range(T):
            index = (
                (fl(idx.alpha[0]) * float(idx.y2[t]) if idx.alpha else 0.0)
                + fl(idx.zb[0][t])
                + g * lag
                + c
                + float(u[t])
            )
            y1 = max(index, thresholds[t])
            y1s.append(y1)
            ws.append(int(y1 == thresholds[t]))
            lag = y1
        return tuple(y1s), tuple(ws)

    raise ValueError(f"cannot simulate family {fam!r}")


def structural_residual(model: ModelSpec, idx: StructuralIndex, outcome: OutcomeSeq, u, v) -> float:
    """Sum of hinge violations of the defining relations; zero iff consistent.

    ``v = (c, y0)`` style tuples: unit latents first, then the initial
    condition when the family needs one.
    """
    T = model.T
    fam = model.family

    def fl(x: LinExpr) -> float:
        return float(x.const)

    total = 0.0
    if fam in ("binary_static", "binary_dynamic"):
        c = float(v[0])
        lag = outcome.y0 if outcome.y0 is not None else (v[1] if len(v) > 1 else 0)
        for t in range(T):
            y = outcome.y[t]
            index = (
                (fl(idx.alpha[0]) * float(idx.y2[t]) if idx.alpha else 0.0)
                + fl(idx.zb[0][t])
                + fl(idx.lag_term(int(lag)))
                + c
                + float(u[t])
            )
            total += max(0.0, (1 - 2 * y) * index)
            lag = y
        return total

    if fam == "ordered":
        c = float(v[0])
        lag = outcome.y0 if outcome.y0 is not None else (v[1] if len(v) > 1 else 0)
        cuts = [fl(x) for x in idx.cuts]
        for t in range(T):
            y = outcome.y[t]
            index = fl(idx.zb[0][t]) + (
                fl(idx.lag_term(int(lag))) if model.y0_status != "absent" else 0.0
            ) + c + float(u[t])
            if y >= 1:
                total += max(0.0, cuts[y - 1] - index)
            if y <= model.n_choices - 2:
                total += max(0.0, index - cuts[y])
            lag = y
        return total

    if fam == "multidiscrete":
        K = model.n_choices
        for t in range(T):
            utils = []
            for d in range(1, K + 1):
                val = fl(idx.zb[d - 1][t]) + float(u[d - 1][t])
                if d < K:
                    val += float(v[d - 1])
                utils.append(val)
            chosen = outcome.y[t]
            total += sum(max(0.0, x - utils[chosen - 1]) for x in utils)
        return total

    if fam == "simultaneous_binary":
        v1, v2 = float(v[0]), float(v[1])
        for t in range(T):
            y1, y2 = outcome.y[t], outcome.y[T + t]
            i1 = fl(idx.alpha[0]) * y2 + fl(idx.zb[0][t]) + v1 + float(u[0][t])
            i2 = fl(idx.alpha[1]) * y1 + fl(idx.zb[1][t]) + v2 + float(u[1][t])
            total += max(0.0, (1 - 2 * y1) * i1) + max(0.0, (1 - 2 * y2) * i2)
        return total

    if fam == "censored":
        c = float(v[0])
        lag = float(outcome.y0) if outcome.y0 is not None else float(v[1]) if len(v) > 1 else 0.0
        g = fl(idx.gamma[0]) if idx.gamma else 0.0
        for t in range(T):
            index = (
                (fl(idx.alpha[0]) * float(idx.y2[t]) if idx.alpha else 0.0)
                + fl(idx.zb[0][t])
                + g * lag
                + c
                + float(u[t])
            )
            y1 = float(outcome.y1vals[t])
            y3 = float(outcome.y3vals[t])
            if outcome.w[t] == 0:
                total += abs(y1 - index)
            else:
                total += abs(y1 - y3) + max(0.0, index - y3)
            lag = y1
        return total

    raise ValueError(f"no residual for family {fam!r}")


def load_model_json(path: str) -> ModelSpec:
    with open(path) as fh:
        return ModelSpec.from_dict(json.load(fh))


def load_theta_json(path: str) -> Theta:
    with open(path) as fh:
        return Theta.from_dict(json.load(fh))
