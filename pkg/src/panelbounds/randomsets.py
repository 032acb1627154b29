"""u-compatible sets, their unions, containment outcomes, and the core
determining collection.

``ustar`` removes the unit-level latents from the per-period structural
relations by exact Fourier-Motzkin elimination (searching over the feasible
initial-condition values when the initial condition is latent) and expresses
the result in differenced-u coordinates.  Each discrete family also carries a
tabled closed form; the two constructions are cross-checked in the tests.

``core_determining_collection`` starts from all unions of distinct non-full
u-compatible sets and prunes: unions splitting into measure-disjoint halves
with no cross absorption deliver implied inequalities and are dropped, as are
candidates whose union coincides (as a set) with an earlier candidate's.
Everything runs on exact rationals and works unchanged with symbolic
parameters under a sign-regime assumption system.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import polyhedra as ph
from .models import (
    CovariateCell,
    ModelSpec,
    OutcomeSeq,
    StructuralIndex,
    Theta,
    delta_coords,
    dt_inverse,
    enumerate_outcomes,
    latent_coords,
    to_delta_coordinates,
    y0_branches,
)
from .polyhedra import (
    LinExpr,
    LinIneqSystem,
    RegionUnion,
    canonical_key,
    fourier_motzkin_eliminate,
    full_space,
    ge,
    intersect_all,
    is_empty,
    is_subset,
    le,
    merge_coords,
    prune_union_parts,
    semantic_prune_rows,
    system,
    union_is_full,
)


@dataclass(frozen=True)
class UStarSet:
    """The set of differenced-u values compatible with one outcome path."""

    outcome: OutcomeSeq
    region: RegionUnion
    is_full: bool

    @property
    def is_empty_region(self) -> bool:
        return all(is_empty(p) for p in self.region.parts)


def ustar_from_index(
    model: ModelSpec,
    idx: StructuralIndex,
    outcome: OutcomeSeq,
    assuming: Optional[LinIneqSystem] = None,
    prune: bool = True,
) -> UStarSet:
    """Elimination route: intersect the period inverses, eliminate the unit
    latents per feasible initial-condition branch, union the branches."""
    parts = []
    for branch in y0_branches(model, outcome):
        joint = intersect_all(
            dt_inverse(model, idx, t, outcome, branch) for t in range(1, model.T + 1)
        )
        for lc in latent_coords(model):
            if lc in joint.coords:
                joint = fourier_motzkin_eliminate(joint, lc)
        parts.append(to_delta_coordinates(model, joint))
    coords = merge_coords(*(p.coords for p in parts))
    parts = [ph.system(coords, p.rows) for p in parts]
    if prune:
        parts = list(prune_union_parts(parts, assuming=assuming))
        parts = [semantic_prune_rows(p, assuming=assuming) for p in parts]
    region = RegionUnion(tuple(parts))
    full = all(p.is_trivially_full for p in parts) or union_is_full(region, assuming)
    return UStarSet(outcome, region, full)


def ustar(
    model: ModelSpec,
    theta: Theta,
    outcome: OutcomeSeq,
    cell: CovariateCell,
    assuming: Optional[LinIneqSystem] = None,
) -> UStarSet:
    """u-compatible set for a numeric parameter value and covariate cell."""
    idx = StructuralIndex.numeric(model, theta, cell)
    return ustar_from_index(model, idx, outcome, assuming=assuming)


# ---------------------------------------------------------------------------
# Tabled closed forms
# ---------------------------------------------------------------------------


def ustar_closed_form(
    model: ModelSpec,
    idx: StructuralIndex,
    outcome: OutcomeSeq,
    assuming: Optional[LinIneqSystem] = None,
    prune: bool = True,
) -> UStarSet:
    """Family-specific direct construction (no elimination).

    Binary: the pairwise interval condition between censoring...  between the
    one-periods and zero-periods, per initial-condition branch.  Ordered: the
    all-pairs cut-difference rows.  Multiple-discrete/simultaneous: the
    two-period tabled rows.  Censored: equality rows across uncensored pairs
    and inequality rows for censored-uncensored pairs.
    """
    fam = model.family
    T = model.T
    builders = {
        "binary_static": _cf_binary,
        "binary_dynamic": _cf_binary,
        "ordered": _cf_ordered,
        "multidiscrete": _cf_mdc,
        "simultaneous_binary": _cf_ses,
        "censored": _cf_censored,
    }
    if fam not in builders:
        raise ValueError(f"no closed form for family {fam!r}")
    if fam in ("multidiscrete", "simultaneous_binary") and T != 2:
        raise ValueError("tabled closed form covers two periods for this family")
    parts = builders[fam](model, idx, outcome)
    coords = merge_coords(delta_coords(model), *(p.coords for p in parts))
    parts = [ph.system(coords, p.rows) for p in parts]
    if prune:
        parts = list(prune_union_parts(parts, assuming=assuming))
        parts = [semantic_prune_rows(p, assuming=assuming) for p in parts]
    region = RegionUnion(tuple(parts))
    full = all(p.is_trivially_full for p in parts) or union_is_full(region, assuming)
    return UStarSet(outcome, region, full)


def _period_index(model, idx, outcome, t, branch):
    """Deterministic index piece of period t (without c and u)."""
    from .models import _lag_value

    lag = _lag_value(model, outcome, t, branch)
    expr = idx.zb[0][t - 1] + idx.lag_term(lag)
    if idx.alpha:
        expr = expr + idx.alpha_term(t - 1)
    return expr


def _delta_u(model, t):
    return LinExpr.coord(f"du{t}1") if t > 1 else LinExpr.const_(0)


def _cf_binary(model, idx, outcome):
    parts = []
    for branch in y0_branches(model, outcome):
        ones = [t for t in range(1, model.T + 1) if outcome.y[t - 1] == 1]
        zeros = [t for t in range(1, model.T + 1) if outcome.y[t - 1] == 0]
        rows = []
        for t in ones:
            for s in zeros:
                # max_{T1} -(idx+u) <= min_{T0} -(idx+u): u_t - u_s >= idx_s - idx_t
                lhs = _delta_u(model, t) - _delta_u(model, s)
                rhs = _period_index(model, idx, outcome, s, branch) - _period_index(
                    model, idx, outcome, t, branch
                )
                rows.append(ge(lhs, rhs))
        parts.append(system(delta_coords(model), rows))
    return parts


def _cf_ordered(model, idx, outcome):
    from .models import _lag_value

    J = model.n_choices - 1
    parts = []
    for branch in y0_branches(model, outcome):
        rows = []
        for t in range(1, model.T + 1):
            for s in range(1, model.T + 1):
                if s == t:
                    continue
                yt, ys = outcome.y[t - 1], outcome.y[s - 1]
                if yt == J and ys == 0:
                    continue  # +inf upper cut minus -inf lower cut: vacuous
                # u_t - u_s <= c_{yt+1} - c_{ys} - (idx_t - idx_s)
                upper = idx.cuts[yt] if yt < J else None
                lower = idx.cuts[ys - 1] if ys >= 1 else None
                if upper is None or lower is None:
                    continue
                lhs = _delta_u(model, t) - _delta_u(model, s)
                rhs = (
                    upper
                    - lower
                    - (
                        _period_index(model, idx, outcome, t, branch)
                        - _period_index(model, idx, outcome, s, branch)
                    )
                )
                rows.append(le(lhs, rhs))
        parts.append(system(delta_coords(model), rows))
    return parts


def _cf_mdc(model, idx, outcome):
    d1, d2 = outcome.y[0], outcome.y[1]
    rows = []
    if d1 != d2:
        # Delta u_{d2} - Delta u_{d1} >= Delta zb_{d1} - Delta zb_{d2}
        lhs = LinExpr.coord(f"du{d2}") - LinExpr.coord(f"du{d1}")
        rhs = (idx.zb[d1 - 1][1] - idx.zb[d1 - 1][0]) - (idx.zb[d2 - 1][1] - idx.zb[d2 - 1][0])
        rows.append(ge(lhs, rhs))
    return [system(delta_coords(model), rows)]


def _cf_ses(model, idx, outcome):
    T = model.T
    y1 = outcome.y[:T]
    y2 = outcome.y[T:]
    rows = []
    for j, (own, partner) in enumerate(((y1, y2), (y2, y1)), start=1):
        if own[0] == own[1]:
            continue  # no switch in this equation: its latent absorbs everything
        dzb = idx.zb[j - 1][1] - idx.zb[j - 1][0]
        dalpha = idx.alpha[j - 1] * (partner[1] - partner[0])
        du = LinExpr.coord(f"du{j}")
        if own == (0, 1):
            rows.append(ge(du, -dzb - dalpha))
        else:  # (1, 0)
            rows.append(le(du, -dzb - dalpha))
    return [system(delta_coords(model), rows)]


def _cf_censored(model, idx, outcome):
    zeros = [t for t in range(1, model.T + 1) if outcome.w[t - 1] == 0]
    ones = [t for t in range(1, model.T + 1) if outcome.w[t - 1] == 1]

    def rhs_pair(t, s, branch):
        # Delta_ts y1 - alpha Delta_ts y2 - Delta_ts zb - gamma Delta_{t-1,s-1} y1
        y1 = [Fraction(v) if not isinstance(v, Fraction) else v for v in outcome.y1vals]
        expr = LinExpr.const_(y1[t - 1] - y1[s - 1])
        if idx.alpha:
            expr = expr - idx.alpha[0] * (Fraction(outcome.y2vals[t - 1]) - Fraction(outcome.y2vals[s - 1]))
        expr = expr - (idx.zb[0][t - 1] - idx.zb[0][s - 1])
        if idx.gamma and model.y0_status != "absent":
            lag_t = _censored_lag_level(outcome, t, branch)
            lag_s = _censored_lag_level(outcome, s, branch)
            if lag_t is None or lag_s is None:
                return None  # latent initial level enters: handled by elimination route
            expr = expr - idx.gamma[0] * (lag_t - lag_s)
        return expr

    branches = y0_branches(model, outcome)
    parts = []
    for branch in branches:
        rows = []
        ok = True
        for a, t in enumerate(zeros):
            for s in zeros[a + 1 :]:
                rhs = rhs_pair(t, s, branch)
                if rhs is None:
                    ok = False
                    break
                rows.append(ph.eq(_delta_u(model, t) - _delta_u(model, s), rhs))
            if not ok:
                break
        if ok:
            for s in ones:
                for t in zeros:
                    rhs = rhs_pair(t, s, branch)
                    if rhs is None:
                        ok = False
                        break
                    rows.append(ge(_delta_u(model, t) - _delta_u(model, s), rhs))
                if not ok:
                    break
        if not ok:
            raise ValueError(
                "closed form needs an observed initial level for the dynamic censored model"
            )
        parts.append(system(delta_coords(model), rows))
    return parts


def _censored_lag_level(outcome, t, branch):
    if t > 1:
        return Fraction(outcome.y1vals[t - 2])
    if outcome.y0 is not None:
        return Fraction(outcome.y0)
    return None if branch is None else Fraction(branch)


# ---------------------------------------------------------------------------
# Dual sets
# ---------------------------------------------------------------------------


def ystar(
    model: ModelSpec,
    theta: Theta,
    u: Sequence,
    cell: CovariateCell,
) -> set[OutcomeSeq]:
    """Outcome paths supportable at (z, u) for some unit-latent value.

    Decided directly from the period inverses: pin u, then test nonemptiness
    of the unit-latent polytope within each initial-condition branch.  This
    route never builds the differenced-u region, so the duality with
    ``ustar`` is a genuine cross-check.
    """
    if model.family == "censored":
        raise ValueError(
            "the censored family has continuous outcomes; test individual records "
            "with outcome_supportable"
        )
    idx = StructuralIndex.numeric(model, theta, cell)
    values = _u_values(model, u)
    out: set[OutcomeSeq] = set()
    for outcome in enumerate_outcomes(model):
        if model.y0_status == "observed" and model.family in ("binary_dynamic", "ordered"):
            levels = model.n_choices if model.family == "ordered" else 2
            candidates = [outcome.with_y0(b) for b in range(levels)]
        else:
            candidates = [outcome]
        for cand in candidates:
            if _v_feasible(model, idx, cand, values):
                out.add(cand)
    return out


def outcome_supportable(
    model: ModelSpec,
    theta: Theta,
    outcome: OutcomeSeq,
    u: Sequence,
    cell: CovariateCell,
) -> bool:
    """Is this single outcome record supportable at (z, u) for some unit
    latent?  Works for every family, including censored level records."""
    idx = StructuralIndex.numeric(model, theta, cell)
    return _v_feasible(model, idx, outcome, _u_values(model, u))


def _u_values(model: ModelSpec, u) -> dict[str, Fraction]:
    vals: dict[str, Fraction] = {}
    if model.family in ("multidiscrete", "simultaneous_binary"):
        n_series = model.n_choices if model.family == "multidiscrete" else 2
        for d in range(1, n_series + 1):
            for t in range(1, model.T + 1):
                vals[f"u{d}p{t}"] = Fraction(u[d - 1][t - 1])
    else:
        for t in range(1, model.T + 1):
            vals[f"u{t}"] = Fraction(u[t - 1])
    return vals


def _v_feasible(model, idx, outcome, u_values) -> bool:
    for branch in y0_branches(model, outcome):
        joint = intersect_all(
            dt_inverse(model, idx, t, outcome, branch) for t in range(1, model.T + 1)
        )
        pinned = ph.substitute(joint, u_values)
        if not is_empty(pinned):
            return True
    return False


# ---------------------------------------------------------------------------
# Unions, containment, core determining collection
# ---------------------------------------------------------------------------


def union_region(
    model: ModelSpec,
    theta: Theta,
    t_set: Sequence[OutcomeSeq],
    cell: CovariateCell,
) -> RegionUnion:
    """Union of the member u-compatible sets, duplicate parts dropped."""
    if not t_set:
        raise ValueError("empty outcome collection")
    idx = StructuralIndex.numeric(model, theta, cell)
    return union_region_from_index(model, idx, t_set)


def union_region_from_index(model, idx, t_set, assuming=None) -> RegionUnion:
    parts: list = []
    seen = set()
    for y in t_set:
        us = ustar_from_index(model, idx, y, assuming=assuming)
        if us.is_full:
            return RegionUnion((full_space(us.region.coords),))
        for p in us.region.parts:
            key = canonical_key(p)
            if key not in seen:
                seen.add(key)
                parts.append(p)
    coords = merge_coords(*(p.coords for p in parts))
    return RegionUnion(tuple(ph.system(coords, p.rows) for p in parts))


def containment_outcomes(
    model: ModelSpec,
    theta: Theta,
    s_region: RegionUnion,
    cell: CovariateCell,
    assuming: Optional[LinIneqSystem] = None,
) -> set[OutcomeSeq]:
    """Outcomes whose u-compatible set sits inside ``s_region``."""
    idx = StructuralIndex.numeric(model, theta, cell)
    return containment_outcomes_from_index(model, idx, s_region, assuming)


def containment_outcomes_from_index(
    model, idx, s_region, assuming=None, outcomes=None
) -> set[OutcomeSeq]:
    s_full = union_is_full(s_region, assuming)
    out = set()
    for y in outcomes if outcomes is not None else enumerate_outcomes(model):
        us = ustar_from_index(model, idx, y, assuming=assuming)
        if us.is_full:
            if s_full:
                out.add(y)
            continue
        if all(is_subset(p, s_region, assuming=assuming) for p in us.region.parts):
            out.add(y)
    return out


@dataclass(frozen=True)
class CdcItem:
    """One retained test set: generators, region, containment outcomes."""

    item_id: int
    t_set: tuple[OutcomeSeq, ...]
    s_region: RegionUnion
    y_set: tuple[OutcomeSeq, ...]


@dataclass(frozen=True)
class CdcResult:
    items: tuple[CdcItem, ...]
    n_distinct_parts: int
    n_candidate_unions: int
    identical_pairs: tuple[tuple[OutcomeSeq, OutcomeSeq], ...]
    outcomes: tuple[OutcomeSeq, ...]

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


class CdcCapError(ValueError):
    """Too many distinct non-full sets: fall back to the brute-force
    discretized Artstein check instead of union enumeration."""


def core_determining_collection(
    model: ModelSpec,
    theta: Optional[Theta] = None,
    cell: Optional[CovariateCell] = None,
    *,
    index: Optional[StructuralIndex] = None,
    assuming: Optional[LinIneqSystem] = None,
    outcomes: Optional[Sequence[OutcomeSeq]] = None,
    cap: int = 12,
) -> CdcResult:
    """Enumerate-and-prune over all unions of distinct non-full sets.

    Pruning drops (a) candidates whose generator set splits into two groups
    with Lebesgue-null mutual overlap and no absorption across the split,
    (b) candidates whose union equals (as a set) an earlier candidate's union
    (same containment outcomes -- the two coincide for full-dimensional
    parts), and (c) candidates whose union covers the whole space.  The
    intersection-removal rule for complementary covers is checked last; with
    full-space outcome sets present it never fires for the shipped families.
    """
    if index is None:
        if theta is None or cell is None:
            raise ValueError("need either a numeric (theta, cell) or a symbolic index")
        index = StructuralIndex.numeric(model, theta, cell)
    if outcomes is None:
        outcomes = enumerate_outcomes(model)
        if model.y0_status == "observed" and model.family in ("binary_dynamic", "ordered"):
            raise ValueError(
                "observed-initial-condition models need explicit per-y0 outcome lists"
            )
    outcomes = list(outcomes)

    usets = {y: ustar_from_index(model, index, y, assuming=assuming) for y in outcomes}
    empties = [y for y in outcomes if usets[y].is_empty_region]
    if empties:
        # cannot happen in the shipped families (every outcome path is
        # attainable for extreme latents); refuse rather than misprune
        raise ValueError(
            f"empty u-compatible set for {empties[0].label()}: "
            "collection pruning assumes attainable outcome paths"
        )
    nonfull = [y for y in outcomes if not usets[y].is_full]

    # group outcomes with identical sets; representative = first in outcome order
    groups: dict[str, list[OutcomeSeq]] = {}
    for y in nonfull:
        groups.setdefault(canonical_key(usets[y].region), []).append(y)
    # semantic merge of syntactically distinct but equal regions
    merged = True
    while merged:
        merged = False
        for a, b in itertools.combinations(list(groups), 2):
            if a in groups and b in groups and ph.regions_equal(
                usets[groups[a][0]].region, usets[groups[b][0]].region, assuming=assuming
            ):
                groups[a].extend(groups.pop(b))
                merged = True
                break

    reps = [members[0] for members in groups.values()]
    identical_pairs = tuple(
        (m[0], other)
        for m in groups.values()
        if len(m) > 1
        for other in m[1:]
    )
    k = len(reps)
    if k > cap:
        raise CdcCapError(
            f"{k} distinct non-full sets exceed the cap {cap}; "
            "use the brute-force Artstein check on a discretized support"
        )

    part_order = sorted(
        range(k),
        key=lambda i: (
            sum(len(p.rows) for p in usets[reps[i]].region.parts),
            reps[i].y,
        ),
    )
    reps = [reps[i] for i in part_order]
    regions = [usets[y].region for y in reps]
    rep_index = {y: i for i, y in enumerate(reps)}
    rep_of_outcome = {}
    for members in groups.values():
        i = rep_index[members[0]]
        for m in members:
            rep_of_outcome[m] = i

    coords = merge_coords(*(r.coords for r in regions))
    regions = [
        RegionUnion(tuple(ph.system(coords, p.rows) for p in r.parts)) for r in regions
    ]

    # pairwise Lebesgue-null overlap matrix
    thin = [[False] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            t = all(
                ph.has_no_interior(pi.intersect(pj), assuming=assuming)
                for pi in regions[i].parts
                for pj in regions[j].parts
            )
            thin[i][j] = thin[j][i] = t

    contain_cache: dict[tuple[int, frozenset], bool] = {}
    true_sets: dict[int, list[frozenset]] = {i: [] for i in range(k)}
    false_sets: dict[int, list[frozenset]] = {i: [] for i in range(k)}

    def union_of(fs: frozenset) -> RegionUnion:
        parts = []
        for i in sorted(fs):
            parts.extend(regions[i].parts)
        return RegionUnion(tuple(parts))

    def contains(i: int, fs: frozenset) -> bool:
        if i in fs:
            return True
        key = (i, fs)
        hit = contain_cache.get(key)
        if hit is not None:
            return hit
        for t in true_sets[i]:
            if t <= fs:
                contain_cache[key] = True
                return True
        for f in false_sets[i]:
            if fs <= f:
                contain_cache[key] = False
                return False
        val = all(
            is_subset(p, union_of(fs), assuming=assuming) for p in regions[i].parts
        )
        contain_cache[key] = val
        (true_sets if val else false_sets)[i].append(fs)
        return val

    y_cache: dict[frozenset, frozenset] = {}

    def y_of(fs: frozenset) -> frozenset:
        hit = y_cache.get(fs)
        if hit is None:
            hit = frozenset(
                y for y in nonfull if contains(rep_of_outcome[y], fs)
            )
            y_cache[fs] = hit
        return hit

    full_sets: list[frozenset] = []

    def known_full(fs: frozenset) -> bool:
        return any(f <= fs for f in full_sets)

    items_by_y: dict[frozenset, tuple[tuple[int, ...], frozenset]] = {}
    order: list[frozenset] = []
    n_candidates = 2**k - 2 if k else 0

    for size in range(1, k + 1):
        for combo in itertools.combinations(range(k), size):
            fs = frozenset(combo)
            if known_full(fs):
                continue
            if union_is_full(union_of(fs), assuming=assuming):
                full_sets.append(fs)
                continue
            ys = y_of(fs)
            if ys in items_by_y:
                continue
            items_by_y[ys] = (combo, fs)
            order.append(ys)

    retained: list[tuple[tuple[int, ...], frozenset, frozenset]] = []
    for ys in order:
        combo, fs = items_by_y[ys]
        part_ids = sorted(rep_index[y] for y in ys if y in rep_index)
        if _splits(part_ids, thin, y_of, ys):
            continue
        retained.append((combo, fs, ys))

    retained = _luo_wang_ponomarev(retained, union_of, y_of, assuming, nonfull, outcomes)

    items = []
    for n, (combo, fs, ys) in enumerate(
        sorted(retained, key=lambda it: (len(it[0]), it[0])), start=1
    ):
        t_set = tuple(reps[i] for i in combo)
        y_sorted = tuple(sorted(ys, key=lambda o: (o.y, o.w or ())))
        items.append(CdcItem(n, t_set, union_of(fs), y_sorted))
    return CdcResult(
        items=tuple(items),
        n_distinct_parts=k,
        n_candidate_unions=n_candidates,
        identical_pairs=identical_pairs,
        outcomes=tuple(outcomes),
    )


def _splits(part_ids: list[int], thin, y_of, ys: frozenset) -> bool:
    """Is there a bipartition with null overlap and no cross absorption?"""
    m = len(part_ids)
    if m < 2:
        return False
    for mask in range(1, 2 ** (m - 1)):
        g1 = [part_ids[i] for i in range(m) if (mask >> i) & 1]
        g2 = [part_ids[i] for i in range(m) if not (mask >> i) & 1]
        if not all(thin[i][j] for i in g1 for j in g2):
            continue
        if y_of(frozenset(g1)) | y_of(frozenset(g2)) == ys:
            return True
    return False


def _luo_wang_ponomarev(retained, union_of, y_of, assuming, nonfull, outcomes):
    """Drop an intersection member of a complementary cover (literal rule).

    Requires the two covers to jointly contain every outcome path; families
    with full-space u-compatible sets never satisfy that, so this is a
    correctness guard rather than a workhorse.
    """
    all_outcomes = frozenset(outcomes)
    drop: set[int] = set()
    for a in range(len(retained)):
        for b in range(len(retained)):
            if a == b:
                continue
            _, fs_a, ys_a = retained[a]
            _, fs_b, ys_b = retained[b]
            if (ys_a | ys_b) != all_outcomes:
                continue
            if not union_is_full(
                RegionUnion(union_of(fs_a).parts + union_of(fs_b).parts), assuming=assuming
            ):
                continue
            inter_parts = []
            for pa in union_of(fs_a).parts:
                for pb in union_of(fs_b).parts:
                    piece = pa.intersect(pb)
                    if not is_empty(piece if assuming is None else piece.intersect(assuming)):
                        inter_parts.append(piece)
            if not inter_parts:
                continue
            inter = RegionUnion(tuple(inter_parts))
            for c, (_, fs_c, ys_c) in enumerate(retained):
                if c in (a, b) or c in drop:
                    continue
                if ys_c != (ys_a & ys_b):
                    continue
                if ph.regions_equal(union_of(fs_c), inter, assuming=assuming, ae=True):
                    drop.add(c)
    return [r for i, r in enumerate(retained) if i not in drop]
