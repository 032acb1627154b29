"""Symbolic set tables: named parameter coordinates, one block per sign regime.

Each scheme fixes a family, a horizon, symbolic parameter coordinates
(``dzb21`` for the differenced covariate index, ``g`` for the lag
coefficient, ``c1 < c2`` for ordered cuts, ``a1, a2 > 0`` for the
simultaneous interaction terms) and a sign-regime assumption system.  The
generators below then run the ordinary engine on those symbols and render
canonical text for golden-file diffing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from . import polyhedra as ph
from .models import (
    ModelSpec,
    OutcomeSeq,
    StructuralIndex,
    enumerate_outcomes,
)
from .polyhedra import (
    LinExpr,
    LinIneqSystem,
    RegionUnion,
    full_space,
    gt,
    lt,
    system,
)
from .randomsets import (
    CdcResult,
    UStarSet,
    core_determining_collection,
    ustar_from_index,
)


@dataclass(frozen=True)
class SymbolicScheme:
    name: str
    title: str
    model: ModelSpec
    index: StructuralIndex
    assuming: Optional[LinIneqSystem]


def _c(name: str) -> LinExpr:
    return LinExpr.coord(name)


def _zero() -> LinExpr:
    return LinExpr.const_(0)


def scheme(name: str) -> SymbolicScheme:
    """Named symbolic configurations used by the shipped tables."""
    if name == "sbr3":
        model = ModelSpec("binary_static", T=3)
        idx = StructuralIndex(
            model, zb=((_zero(), _c("dzb21"), _c("dzb31")),), alpha=(), gamma=(), cuts=()
        )
        return SymbolicScheme(name, "static binary response, 3 periods (gamma = 0)", model, idx, None)
    if name in ("dbr3_gpos", "dbr3_gneg"):
        sign = "gamma>0" if name.endswith("gpos") else "gamma<0"
        model = ModelSpec("binary_dynamic", T=3, y0_status="unobserved", sign_restrictions=(sign,))
        idx = StructuralIndex(
            model,
            zb=((_zero(), _c("dzb21"), _c("dzb31")),),
            alpha=(),
            gamma=(_c("g"),),
            cuts=(),
        )
        row = gt(_c("g"), 0) if sign == "gamma>0" else lt(_c("g"), 0)
        return SymbolicScheme(
            name,
            f"dynamic binary response, 3 periods, y0 unobserved ({sign.replace('gamma', 'gamma ')})",
            model,
            idx,
            system(("g",), [row]),
        )
    if name in ("dbr2_y0", "dbr2_y1"):
        y0 = 0 if name.endswith("y0") else 1
        model = ModelSpec("binary_dynamic", T=2, y0_status="observed")
        idx = StructuralIndex(
            model, zb=((_zero(), _c("dzb21")),), alpha=(), gamma=(_c("g"),), cuts=()
        )
        return SymbolicScheme(
            name, f"dynamic binary response, 2 periods, y0 = {y0} observed", model, idx, None
        )
    if name == "dbr2_unobs":
        model = ModelSpec("binary_dynamic", T=2, y0_status="unobserved")
        idx = StructuralIndex(
            model, zb=((_zero(), _c("dzb21")),), alpha=(), gamma=(_c("g"),), cuts=()
        )
        return SymbolicScheme(
            name, "dynamic binary response, 2 periods, y0 unobserved", model, idx, None
        )
    if name == "oc3":
        model = ModelSpec("ordered", T=2, n_choices=3)
        idx = StructuralIndex(
            model,
            zb=((_zero(), _c("dzb21")),),
            alpha=(),
            gamma=(),
            cuts=(_c("c1"), _c("c2")),
        )
        return SymbolicScheme(
            name,
            "ordered response, 3 categories, 2 periods (c1 < c2)",
            model,
            idx,
            system(("c1", "c2"), [lt(_c("c1"), _c("c2"))]),
        )
    if name == "mdc3":
        model = ModelSpec("multidiscrete", T=2, n_choices=3)
        idx = StructuralIndex(
            model,
            zb=((_zero(), _c("dzb1")), (_zero(), _c("dzb2")), (_zero(), _zero())),
            alpha=(),
            gamma=(),
            cuts=(),
        )
        return SymbolicScheme(name, "multiple discrete choice, 3 alternatives, 2 periods", model, idx, None)
    if name == "ses2":
        model = ModelSpec(
            "simultaneous_binary", T=2, sign_restrictions=("alpha1>=0", "alpha2>=0")
        )
        idx = StructuralIndex(
            model,
            zb=((_zero(), _c("dzb1")), (_zero(), _c("dzb2"))),
            alpha=(_c("a1"), _c("a2")),
            gamma=(),
            cuts=(),
        )
        return SymbolicScheme(
            name,
            "simultaneous binary response, 2 periods (alpha1 > 0, alpha2 > 0)",
            model,
            idx,
            system(("a1", "a2"), [gt(_c("a1"), 0), gt(_c("a2"), 0)]),
        )
    raise KeyError(f"unknown scheme {name!r}")


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def ustar_rows(sch: SymbolicScheme, y0: Optional[int] = None) -> list[tuple[OutcomeSeq, UStarSet]]:
    rows = []
    for y in enumerate_outcomes(sch.model):
        if y0 is not None:
            y = y.with_y0(y0)
        rows.append((y, ustar_from_index(sch.model, sch.index, y, assuming=sch.assuming)))
    return rows


def render_region(region: RegionUnion | LinIneqSystem, assuming=None, merge: bool = True) -> str:
    if isinstance(region, RegionUnion) and merge:
        region = ph.try_merge_union(region, assuming=assuming)
    if isinstance(region, RegionUnion):
        if len(region.parts) == 1:
            region = region.parts[0]
        else:
            parts = sorted(
                "(" + " && ".join(sorted(r.text() for r in p.rows)) + ")"
                for p in region.parts
            )
            return " || ".join(parts)
    if region.is_trivially_full:
        return "FULL"
    if ph.is_empty(region):
        return "EMPTY"
    return " && ".join(sorted(r.text() for r in region.rows))


def _strip_params(region: RegionUnion, assuming) -> RegionUnion:
    """Drop rows carrying only assumption coordinates (regime restatements)."""
    if assuming is None:
        return region
    exempt = set(assuming.coords)
    parts = []
    for p in region.parts:
        rows = [r for r in p.rows if not (r.terms and all(k in exempt for k, _ in r.terms))]
        parts.append(system(p.coords, rows))
    return RegionUnion(tuple(parts))


def ustar_table_text(sch: SymbolicScheme, y0: Optional[int] = None) -> str:
    lines = [f"# u-compatible sets: {sch.title}"]
    rows = ustar_rows(sch, y0=y0)
    for i, (y, us) in enumerate(rows, start=1):
        body = "FULL" if us.is_full else render_region(
            _strip_params(us.region, sch.assuming), assuming=sch.assuming
        )
        lines.append(f"{i} | {y.label()} | {body}")
    if sch.name == "ses2":
        from .polyhedra import canonical_key

        nonfull = [(y, us) for y, us in rows if not us.is_full]
        groups: dict[str, list[OutcomeSeq]] = {}
        for y, us in nonfull:
            groups.setdefault(canonical_key(us.region), []).append(y)
        n_distinct = len(groups)
        pairs = sum(1 for g in groups.values() if len(g) == 2)
        lines.append(f"# non-full: {len(nonfull)}, distinct: {n_distinct}, identical pairs: {pairs}")
        lines.append(f"# candidate unions before pruning: {2 ** n_distinct - 2}")
    return "\n".join(lines) + "\n"


def cdc_for_scheme(sch: SymbolicScheme, y0: Optional[int] = None) -> CdcResult:
    outcomes = enumerate_outcomes(sch.model)
    if y0 is not None:
        outcomes = [y.with_y0(y0) for y in outcomes]
    return core_determining_collection(
        sch.model, index=sch.index, assuming=sch.assuming, outcomes=outcomes
    )


def _set_label(ys) -> str:
    return "{" + ",".join(y.label() for y in ys) + "}"


def cdc_table_text(sch: SymbolicScheme, y0: Optional[int] = None, with_regions: bool = True) -> str:
    res = cdc_for_scheme(sch, y0=y0)
    lines = [
        f"# core determining collection: {sch.title}",
        f"# parts: {res.n_distinct_parts}, candidate unions: {res.n_candidate_unions}, retained: {len(res.items)}",
    ]
    for item in res.items:
        line = f"{item.item_id} | Y={_set_label(item.y_set)} | T={_set_label(item.t_set)}"
        if with_regions:
            line += " | S=" + render_region(
                _strip_params(item.s_region, sch.assuming), assuming=sch.assuming
            )
        lines.append(line)
    return "\n".join(lines) + "\n"


def oc3_inequality_table_text() -> str:
    """The seven (Y, S) pairs bounding the ordered-response identified set."""
    sch = scheme("oc3")
    res = cdc_for_scheme(sch)
    lines = [f"# containment inequalities: {sch.title}"]
    for item in res.items:
        s_txt = render_region(_strip_params(item.s_region, sch.assuming), assuming=sch.assuming)
        lines.append(f"{item.item_id} | Y={_set_label(item.y_set)} | S={s_txt}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Dual-side table for the two-period binary panel
# ---------------------------------------------------------------------------


def ystar_regions_2p(
    sch: SymbolicScheme, y0: Optional[int]
) -> list[tuple[tuple[OutcomeSeq, ...], RegionUnion]]:
    """Regions of u on which the supportable-outcome collection is constant."""
    model = sch.model
    outcomes = enumerate_outcomes(model)
    if y0 is not None:
        outcomes = [y.with_y0(y0) for y in outcomes]
    usets = {y: ustar_from_index(model, sch.index, y, assuming=sch.assuming) for y in outcomes}
    fulls = [y for y in outcomes if usets[y].is_full]
    nonfulls = [y for y in outcomes if not usets[y].is_full]
    coords = ph.merge_coords(*(usets[y].region.coords for y in outcomes))

    rows = []
    for r in range(len(nonfulls) + 1):
        for included in itertools.combinations(nonfulls, r):
            pieces = [full_space(coords)]
            for y in included:
                pieces = [
                    system(coords, p.rows + part.rows)
                    for p in pieces
                    for part in usets[y].region.parts
                ]
            for y in nonfulls:
                if y in included:
                    continue
                comp = ph.region_complement(
                    RegionUnion(tuple(system(coords, p.rows) for p in usets[y].region.parts))
                )
                pieces = [system(coords, p.rows + c.rows) for p in pieces for c in comp]
            kept = ph.prune_union_parts(pieces, assuming=sch.assuming)
            kept = [ph.semantic_prune_rows(p, assuming=sch.assuming) for p in kept]
            if all(ph.is_empty(p if sch.assuming is None else p.intersect(sch.assuming)) for p in kept):
                continue
            collection = tuple(sorted(fulls + list(included), key=lambda o: o.y))
            rows.append((collection, RegionUnion(tuple(kept))))
    rows.sort(key=lambda it: (len(it[0]), tuple(o.y for o in it[0])))
    return rows


def ystar_table_text() -> str:
    lines = ["# supportable-outcome collections: binary response, two periods"]
    for y0 in (0, 1):
        sch = scheme(f"dbr2_y{y0}")
        lines.append(f"[y0 observed = {y0}]")
        for collection, region in ystar_regions_2p(sch, y0):
            body = render_region(_strip_params(region, sch.assuming), assuming=sch.assuming)
            lines.append(f"{_set_label(collection)} | {body}")
    base = scheme("dbr2_unobs")
    for regime, row in (("gamma>0", gt(_c("g"), 0)), ("gamma<0", lt(_c("g"), 0))):
        sch = SymbolicScheme(
            base.name, base.title, base.model, base.index, system(("g",), [row])
        )
        lines.append(f"[y0 unobserved, {regime}]")
        for collection, region in ystar_regions_2p(sch, None):
            body = render_region(_strip_params(region, sch.assuming), assuming=sch.assuming)
            lines.append(f"{_set_label(collection)} | {body}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# The full golden set
# ---------------------------------------------------------------------------

GOLDEN_TABLES = (
    "ystar_2p_binary",
    "ustar_sbr3",
    "ustar_dbr3_gpos",
    "ustar_dbr3_gneg",
    "ustar_oc3",
    "ineq_oc3",
    "ustar_mdc3",
    "ustar_ses2",
    "cdc_sbr3",
    "cdc_dbr3_gpos",
    "cdc_dbr3_gneg",
    "cdc_mdc3",
    "cdc_ses2",
)


def generate_table(name: str) -> str:
    if name == "ystar_2p_binary":
        return ystar_table_text()
    if name.startswith("ustar_"):
        return ustar_table_text(scheme(name.removeprefix("ustar_")))
    if name == "ineq_oc3":
        return oc3_inequality_table_text()
    if name.startswith("cdc_"):
        return cdc_table_text(scheme(name.removeprefix("cdc_")))
    raise KeyError(f"unknown table {name!r}")


def generate_all_tables(which=None) -> dict[str, str]:
    names = GOLDEN_TABLES if which in (None, "all") else tuple(which.split(","))
    return {name: generate_table(name) for name in names}
