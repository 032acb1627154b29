"""Inequality checking, identified/outer set grid scans, profile bounds.

The containment inequalities are evaluated with the sign-regime core
determining collection instantiated at each covariate cell.  Under the
independence restriction every test set is checked against the largest
containment probability across cells.  Tolerances separate Monte Carlo noise
from genuine violation: three standard errors per simulated measure, zero
when every measure is closed form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from . import tables
from .distributions import CondOutcomeDist, _interval_union, measure, prob_Y_in
from .models import CovariateCell, ModelSpec, OutcomeSeq, StructuralIndex, Theta, enumerate_outcomes
from .polyhedra import RegionUnion, as_union, is_empty, is_subset, union_is_full
from .randomsets import CdcResult, ustar_from_index

EPS = 1e-9


# ---------------------------------------------------------------------------
# Regime-level core determining collections
# ---------------------------------------------------------------------------

_cdc_cache: dict[tuple, CdcResult] = {}


def regime_cdc(model: ModelSpec, theta: Theta, y0: Optional[int] = None) -> CdcResult:
    """Symbolic collection for the parameter's sign regime.

    A lag coefficient on the regime boundary (gamma = 0) uses the static
    collection, whose containment sets remain valid there.
    """
    key: tuple
    if model.family in ("binary_static", "binary_dynamic"):
        g = theta.gamma_scalar() if model.family == "binary_dynamic" else Fraction(0)
        if model.T == 2:
            if model.y0_status == "observed":
                if y0 is None:
                    raise ValueError("two-period observed-initial-condition collection is per y0")
                key = ("dbr2", y0)
                if key not in _cdc_cache:
                    sch = tables.scheme(f"dbr2_y{y0}")
                    _cdc_cache[key] = tables.cdc_for_scheme(sch, y0=y0)
                return _cdc_cache[key]
            key = ("dbr2_unobs",)
            if key not in _cdc_cache:
                _cdc_cache[key] = tables.cdc_for_scheme(tables.scheme("dbr2_unobs"))
            return _cdc_cache[key]
        if model.T == 3:
            if model.family == "binary_static" or g == 0:
                name = "sbr3"
            else:
                name = "dbr3_gpos" if g > 0 else "dbr3_gneg"
            key = (name,)
            if key not in _cdc_cache:
                _cdc_cache[key] = tables.cdc_for_scheme(tables.scheme(name))
            return _cdc_cache[key]
        raise ValueError("tabulated binary collections cover T in {2, 3}")
    if model.family == "ordered":
        key = ("oc3", model.n_choices, model.T)
        if model.T != 2 or model.n_choices != 3 or model.y0_status != "absent":
            raise ValueError("tabulated ordered collection covers the static 3-category, 2-period case")
        if key not in _cdc_cache:
            _cdc_cache[key] = tables.cdc_for_scheme(tables.scheme("oc3"))
        return _cdc_cache[key]
    if model.family == "multidiscrete":
        if model.T != 2 or model.n_choices != 3:
            raise ValueError("tabulated choice collection covers 3 alternatives, 2 periods")
        key = ("mdc3",)
        if key not in _cdc_cache:
            _cdc_cache[key] = tables.cdc_for_scheme(tables.scheme("mdc3"))
        return _cdc_cache[key]
    if model.family == "simultaneous_binary":
        if model.T != 2:
            raise ValueError("tabulated simultaneous collection covers 2 periods")
        if any(a < 0 for a in theta.alpha):
            raise ValueError("only the alpha1, alpha2 >= 0 regime is tabulated")
        key = ("ses2",)
        if key not in _cdc_cache:
            _cdc_cache[key] = tables.cdc_for_scheme(tables.scheme("ses2"))
        return _cdc_cache[key]
    raise ValueError(f"no core determining collection for family {model.family!r}")


# ---------------------------------------------------------------------------
# Structure checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckItem:
    item_id: int
    y0: Optional[int]
    cell_id: int
    lhs: float
    rhs: float
    rhs_se: float
    slack: float

    def to_json(self):
        return {
            "item": self.item_id,
            "y0": self.y0,
            "cell": self.cell_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "rhs_se": self.rhs_se,
            "slack": self.slack,
        }


@dataclass(frozen=True)
class CheckReport:
    items: tuple[CheckItem, ...]
    passed: bool
    min_slack: float
    tol: float

    def to_json(self):
        return {
            "pass": self.passed,
            "min_slack": self.min_slack,
            "tol": self.tol,
            "items": [it.to_json() for it in self.items],
        }


def _g_map(G, y0_values) -> Mapping:
    if isinstance(G, Mapping):
        return G
    return {y0: G for y0 in y0_values}


class _UstarCache:
    """Per-(theta, cell, y0) numeric u-compatible sets, shared across items."""

    def __init__(self, model: ModelSpec, theta: Theta):
        self.model = model
        self.theta = theta
        self._by_cell: dict = {}

    def sets(self, cell: CovariateCell, y0: Optional[int]):
        key = (cell.cell_id, y0)
        if key not in self._by_cell:
            idx = StructuralIndex.numeric(self.model, self.theta, cell)
            out = {}
            for y in enumerate_outcomes(self.model):
                yy = y.with_y0(y0) if y0 is not None else y
                out[y] = ustar_from_index(self.model, idx, yy)
            self._by_cell[key] = out
        return self._by_cell[key]

    def union(self, cell: CovariateCell, y0: Optional[int], t_set) -> RegionUnion:
        usets = self.sets(cell, y0)
        parts = []
        seen = set()
        from .polyhedra import canonical_key, full_space, merge_coords, system

        for y in t_set:
            base = OutcomeSeq(y.y, None, y.w, y.y1vals, y.y2vals, y.y3vals)
            us = usets[base]
            if us.is_full:
                return RegionUnion((full_space(us.region.coords),))
            for p in us.region.parts:
                key = canonical_key(p)
                if key not in seen:
                    seen.add(key)
                    parts.append(p)
        coords = merge_coords(*(p.coords for p in parts))
        return RegionUnion(tuple(system(coords, p.rows) for p in parts))

    def containment(self, cell: CovariateCell, y0: Optional[int], s_region: RegionUnion):
        usets = self.sets(cell, y0)
        s_full = union_is_full(s_region)
        out = []
        for y, us in usets.items():
            if us.is_full:
                if s_full:
                    out.append(y)
            elif all(is_subset(p, s_region) for p in us.region.parts):
                out.append(y)
        return out


def check_structure(
    model: ModelSpec,
    theta: Theta,
    G,
    F: CondOutcomeDist,
    cdc: Optional[Mapping] = None,
    independence: bool = True,
    tol: Optional[float] = None,
    n_draws: int = 200_000,
    seed_base: int = 20250,
) -> CheckReport:
    """Evaluate every containment inequality of the regime collection.

    ``G`` is a latent law or a mapping keyed by initial-condition value.
    Under the independence restriction the left side of each inequality is
    the supremum over covariate cells.
    """
    y0_groups = F.y0_values
    g_map = _g_map(G, y0_groups)
    cache = _UstarCache(model, theta)
    items: list[CheckItem] = []
    any_mc = False

    for y0v in y0_groups:
        collection = cdc[y0v] if cdc is not None else regime_cdc(model, theta, y0=y0v)
        cells = F.cells
        for item in collection.items:
            for cell in cells:
                s_region = cache.union(cell, y0v, item.t_set)
                if union_is_full(s_region):
                    continue
                res = measure(
                    g_map[y0v],
                    s_region,
                    cell_id=cell.cell_id,
                    model=model,
                    n_draws=n_draws,
                    seed_base=seed_base,
                )
                any_mc = any_mc or not res.exact
                if independence:
                    lhs = max(
                        prob_Y_in(F, c2.cell_id, cache.containment(c2, y0v, s_region), y0=y0v)
                        for c2 in cells
                        if (c2.cell_id, y0v) in F.probs
                    )
                else:
                    lhs = prob_Y_in(
                        F, cell.cell_id, cache.containment(cell, y0v, s_region), y0=y0v
                    )
                items.append(
                    CheckItem(
                        item.item_id,
                        y0v,
                        cell.cell_id,
                        lhs,
                        res.estimate,
                        res.std_error,
                        res.estimate - lhs,
                    )
                )
    min_slack = min((it.slack for it in items), default=math.inf)
    if tol is None:
        tol = 3.0 * max((it.rhs_se for it in items), default=0.0)
    return CheckReport(
        items=tuple(items),
        passed=min_slack >= -tol - EPS,
        min_slack=min_slack,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# Brute-force Artstein oracle on a discretized support
# ---------------------------------------------------------------------------


def artstein_bruteforce(
    model: ModelSpec,
    theta: Theta,
    G,
    F: CondOutcomeDist,
    tol: float = 0.0,
    return_slack: bool = False,
):
    """Check every subset of a finite latent support against every cell.

    ``G`` must be (or map initial conditions to) ``discrete_grid`` laws whose
    support lives in the differenced-u coordinates.  This enumerates all
    2^k subsets, so it is the independent oracle the collection-based check
    is validated against, not a production path.
    """
    y0_groups = F.y0_values
    g_map = _g_map(G, y0_groups)
    cache = _UstarCache(model, theta)
    outcomes = enumerate_outcomes(model)
    min_slack = math.inf
    for y0v in y0_groups:
        Gd = g_map[y0v]
        if Gd.family != "discrete_grid":
            raise ValueError("the brute-force check needs a discrete_grid law")
        k = len(Gd.support)
        if k > 20:
            raise ValueError("support too large for subset enumeration (max 20 points)")
        weights = np.array([float(w) for w in Gd.weights])
        subsets = np.arange(2**k, dtype=np.int64)
        g_of_subset = np.zeros(2**k)
        for j in range(k):
            g_of_subset += weights[j] * ((subsets >> j) & 1)

        sup_lhs = np.zeros(2**k)
        for cell in F.cells:
            if (cell.cell_id, y0v) not in F.probs:
                continue
            usets = cache.sets(cell, y0v)
            vec = F.vector(cell.cell_id, y0v)
            lhs = np.zeros(2**k)
            for i, y in enumerate(outcomes):
                us = usets[y]
                mask = 0
                for j, point in enumerate(Gd.support):
                    pt = dict(zip(us.region.coords, (Fraction(str(x)) for x in point)))
                    if us.region.satisfies(pt):
                        mask |= 1 << j
                contained = (mask & ~subsets) == 0
                lhs += vec[i] * contained
            sup_lhs = np.maximum(sup_lhs, lhs)
        min_slack = min(min_slack, float(np.min(g_of_subset - sup_lhs)))
    ok = min_slack >= -tol - EPS
    return (ok, min_slack) if return_slack else ok


# ---------------------------------------------------------------------------
# Grid scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    idx: tuple[int, ...]
    theta: Mapping[str, float]
    g_index: Optional[int]
    in_set: bool
    min_slack: float
    binding: Optional[str] = None  # tightest inequality's item id, when known


@dataclass(frozen=True)
class IdentifiedSetGrid:
    axes: tuple[tuple[str, tuple[float, ...]], ...]
    points: tuple[GridPoint, ...]
    kind: str

    def theta_projection(self) -> dict[tuple[int, ...], tuple[bool, float]]:
        proj: dict[tuple[int, ...], tuple[bool, float]] = {}
        for p in self.points:
            cur = proj.get(p.idx, (False, -math.inf))
            proj[p.idx] = (cur[0] or p.in_set, max(cur[1], p.min_slack))
        return proj

    def in_points(self) -> list[tuple[int, ...]]:
        return sorted({p.idx for p in self.points if p.in_set})

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "axes": [{"name": n, "values": list(v)} for n, v in self.axes],
            "points": [
                {
                    "idx": list(p.idx),
                    "theta": dict(p.theta),
                    "g_index": p.g_index,
                    "in": p.in_set,
                    "min_slack": p.min_slack,
                    "binding": p.binding,
                }
                for p in self.points
            ],
        }

    def hull_csv(self) -> str:
        """In-set grid points, one row per point (for plotting)."""
        names = [n for n, _ in self.axes]
        lines = [",".join(names + ["min_slack"])]
        seen = set()
        for p in self.points:
            if not p.in_set or p.idx in seen:
                continue
            seen.add(p.idx)
            lines.append(
                ",".join(f"{p.theta[n]:.12g}" for n in names) + f",{p.min_slack:.6g}"
            )
        return "\n".join(lines) + "\n"


def default_theta_builder(model: ModelSpec) -> Callable[[Mapping[str, float]], Theta]:
    def build(point: Mapping[str, float]) -> Theta:
        beta = (Fraction(str(point["beta"])),) if "beta" in point else ()
        gamma = (Fraction(str(point["gamma"])),) if "gamma" in point else ()
        alpha = (Fraction(str(point["alpha"])),) if "alpha" in point else ()
        return Theta(alpha=alpha, beta=beta, gamma=gamma)

    return build


def _grid_points(theta_grid: Mapping[str, Sequence[float]]):
    names = list(theta_grid)
    axes = [tuple(float(v) for v in theta_grid[n]) for n in names]
    for name, ax in zip(names, axes):
        if any(a >= b_ for a, b_ in zip(ax, ax[1:])):
            raise ValueError(f"grid axis {name!r} must increase strictly")
    idx_iter = np.ndindex(*(len(a) for a in axes))
    for idx in idx_iter:
        yield tuple(int(i) for i in idx), {n: axes[k][idx[k]] for k, n in enumerate(names)}


def identified_set_scan(
    model: ModelSpec,
    theta_grid: Mapping[str, Sequence[float]],
    G_grid,
    F: CondOutcomeDist,
    tol: Optional[float] = None,
    theta_builder: Optional[Callable] = None,
    threads: int = 1,
    n_draws: int = 200_000,
    seed_base: int = 20250,
) -> IdentifiedSetGrid:
    """Mark grid points whose structure passes for some latent law.

    ``G_grid`` is a list of candidate laws, or the string
    ``"piecewise_uniform_family"`` to search all scalar-difference laws by
    linear programming (two-period binary models).
    """
    if not theta_grid or any(len(v) == 0 for v in theta_grid.values()):
        raise ValueError("empty grid")
    build = theta_builder or default_theta_builder(model)
    pts = list(_grid_points(theta_grid))
    lp_family = isinstance(G_grid, str)
    if lp_family and G_grid != "piecewise_uniform_family":
        raise ValueError(f"unknown latent family search {G_grid!r}")

    def eval_point(arg):
        idx, vals = arg
        theta = build(vals)
        out = []
        if lp_family:
            ok, slack = nonparametric_family_feasible(model, theta, F)
            out.append(GridPoint(idx, vals, None, ok, slack))
            return out
        for gi, G in enumerate(G_grid):
            rep = check_structure(
                model, theta, G, F, tol=tol, n_draws=n_draws, seed_base=seed_base
            )
            binding = None
            if rep.items:
                worst = min(rep.items, key=lambda it: it.slack)
                binding = f"item{worst.item_id}@cell{worst.cell_id}" + (
                    f"/y0={worst.y0}" if worst.y0 is not None else ""
                )
            out.append(GridPoint(idx, vals, gi, rep.passed, rep.min_slack, binding))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(eval_point, pts))
    else:
        chunks = [eval_point(p) for p in pts]
    points = tuple(p for chunk in chunks for p in chunk)
    axes = tuple((n, tuple(float(v) for v in theta_grid[n])) for n in theta_grid)
    return IdentifiedSetGrid(axes=axes, points=points, kind="identified")


def outer_set_scan(
    model: ModelSpec,
    theta_grid: Mapping[str, Sequence[float]],
    F: CondOutcomeDist,
    tol: float = 0.0,
    theta_builder: Optional[Callable] = None,
    threads: int = 1,
) -> IdentifiedSetGrid:
    """No-latent-law outer set: containment sup must not exceed hitting inf."""
    build = theta_builder or default_theta_builder(model)
    pts = list(_grid_points(theta_grid))

    def eval_point(arg):
        idx, vals = arg
        theta = build(vals)
        cache = _UstarCache(model, theta)
        worst = math.inf
        for y0v in F.y0_values:
            collection = regime_cdc(model, theta, y0=y0v)
            for item in collection.items:
                for cell in F.cells:
                    s_region = cache.union(cell, y0v, item.t_set)
                    if union_is_full(s_region):
                        continue
                    sup_contain = max(
                        prob_Y_in(F, c2.cell_id, cache.containment(c2, y0v, s_region), y0=y0v)
                        for c2 in F.cells
                        if (c2.cell_id, y0v) in F.probs
                    )
                    inf_hit = min(
                        prob_Y_in(F, c2.cell_id, _hitting(cache, c2, y0v, s_region), y0=y0v)
                        for c2 in F.cells
                        if (c2.cell_id, y0v) in F.probs
                    )
                    worst = min(worst, inf_hit - sup_contain)
        return GridPoint(idx, vals, None, worst >= -tol - EPS, worst)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            points = tuple(ex.map(eval_point, pts))
    else:
        points = tuple(eval_point(p) for p in pts)
    axes = tuple((n, tuple(float(v) for v in theta_grid[n])) for n in theta_grid)
    return IdentifiedSetGrid(axes=axes, points=points, kind="outer")


def _hitting(cache: _UstarCache, cell, y0v, s_region: RegionUnion):
    """Outcomes whose u-compatible set intersects the test region."""
    out = []
    for y, us in cache.sets(cell, y0v).items():
        if us.is_full:
            out.append(y)
            continue
        hit = any(
            not is_empty(p.intersect(q))
            for p in us.region.parts
            for q in s_region.parts
        )
        if hit:
            out.append(y)
    return out


# ---------------------------------------------------------------------------
# Scalar-difference nonparametric feasibility (linear program)
# ---------------------------------------------------------------------------


def nonparametric_family_feasible(
    model: ModelSpec, theta: Theta, F: CondOutcomeDist
) -> tuple[bool, float]:
    """Does any scalar-difference latent law satisfy all inequalities?

    Each containment inequality for a one-dimensional region is linear in
    the latent CDF evaluated at the region's breakpoints, so existence of a
    law is a linear-programming feasibility question.  Solved separately per
    initial-condition group, maximizing the worst inequality margin.
    """
    if model.T != 2 or model.family not in ("binary_static", "binary_dynamic"):
        raise ValueError("the scalar-difference family search covers two-period binary models")
    cache = _UstarCache(model, theta)
    worst = math.inf
    for y0v in F.y0_values:
        collection = regime_cdc(model, theta, y0=y0v)
        constraints = []  # (interval list, lhs)
        breakpoints: set[float] = set()
        for item in collection.items:
            for cell in F.cells:
                s_region = cache.union(cell, y0v, item.t_set)
                if union_is_full(s_region):
                    continue
                intervals = _interval_union(as_union(s_region))
                lhs = max(
                    prob_Y_in(F, c2.cell_id, cache.containment(c2, y0v, s_region), y0=y0v)
                    for c2 in F.cells
                    if (c2.cell_id, y0v) in F.probs
                )
                constraints.append((intervals, lhs))
                for a, b in intervals:
                    for x in (a, b):
                        if math.isfinite(x):
                            breakpoints.add(x)
        bps = sorted(breakpoints)
        pos = {x: i for i, x in enumerate(bps)}
        m = len(bps)
        # variables: left limit and value of the latent CDF at each breakpoint
        # (atoms allowed: the sharp family is unrestricted), plus the margin.
        # layout: [F-(b_0), F(b_0), F-(b_1), F(b_1), ..., s]
        def vleft(i):
            return 2 * i

        def vval(i):
            return 2 * i + 1

        n_var = 2 * m + 1
        A_ub, b_ub = [], []

        def mono(lo_idx, hi_idx):
            row = [0.0] * n_var
            row[lo_idx] = 1.0
            row[hi_idx] = -1.0
            A_ub.append(row)
            b_ub.append(0.0)

        for i in range(m):
            mono(vleft(i), vval(i))
            if i + 1 < m:
                mono(vval(i), vleft(i + 1))
        for intervals, lhs in constraints:
            # G(closed interval [a, b]) = F(b) - F-(a)
            row = [0.0] * n_var
            const = 0.0
            for a, b in intervals:
                if math.isfinite(b):
                    row[vval(pos[b])] -= 1.0
                else:
                    const += 1.0
                if math.isfinite(a):
                    row[vleft(pos[a])] += 1.0
            row[-1] = 1.0  # + margin
            A_ub.append(row)
            b_ub.append(const - lhs)
        bounds = [(0.0, 1.0)] * (2 * m) + [(None, None)]
        c = [0.0] * (2 * m) + [-1.0]
        if not constraints:
            continue
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if not res.success:
            return False, -math.inf
        worst = min(worst, float(-res.fun))
    return worst >= -EPS, (0.0 if math.isinf(worst) else worst)


# ---------------------------------------------------------------------------
# Profile bounds for the two-period binary panel (envelope crossing)
# ---------------------------------------------------------------------------


def profile_w_grid(F: CondOutcomeDist, theta: Theta) -> list[float]:
    """Envelope breakpoints plus midpoints, so crossings cannot hide."""
    beta = float(theta.beta[0])
    gamma = float(theta.gamma[0]) if theta.gamma else 0.0
    bps = set()
    for cell in F.cells:
        dz = float(sum(cell.z[1])) - float(sum(cell.z[0]))
        for y0 in (0, 1):
            bps.add(-dz * beta + (y0 - 1) * gamma)
            bps.add(-dz * beta + y0 * gamma)
    pts = sorted(bps)
    grid = list(pts)
    grid.extend((a + b) / 2 for a, b in zip(pts, pts[1:]))
    return sorted(set(grid))


def profile_bounds_2p_binary(
    F: CondOutcomeDist,
    theta_grid: Mapping[str, Sequence[float]],
    w_grid: Optional[Sequence[float]] = None,
    theta_builder: Optional[Callable] = None,
) -> IdentifiedSetGrid:
    """Parameter values whose lower CDF envelope never crosses the upper one.

    The lower envelope at w is the largest switch-up probability among cells
    whose (1,0)-region lies below w; the upper envelope is the smallest
    complement of a switch-down probability among cells whose (0,1)-region
    lies above w.
    """
    if F.model.family != "binary_dynamic" or F.model.T != 2 or F.model.dim_z != 1:
        raise ValueError("profile bounds cover the two-period dynamic binary model (scalar z)")
    if set(F.y0_values) != {0, 1}:
        raise ValueError("profile bounds need outcome laws split by the initial condition")
    build = theta_builder or default_theta_builder(F.model)
    outcomes = enumerate_outcomes(F.model)
    i01 = outcomes.index(OutcomeSeq((0, 1)))
    i10 = outcomes.index(OutcomeSeq((1, 0)))

    dzs = {
        cell.cell_id: float(sum(cell.z[1])) - float(sum(cell.z[0])) for cell in F.cells
    }

    points = []
    for idx, vals in _grid_points(theta_grid):
        theta = build(vals)
        beta = float(theta.beta[0])
        gamma = float(theta.gamma[0]) if theta.gamma else 0.0
        ws = list(w_grid) if w_grid is not None else profile_w_grid(F, theta)
        worst = math.inf
        for y0 in (0, 1):
            for w in ws:
                lower = 0.0
                upper = 1.0
                for cell in F.cells:
                    if (cell.cell_id, y0) not in F.probs:
                        continue
                    vec = F.vector(cell.cell_id, y0)
                    dz = dzs[cell.cell_id]
                    if -dz * beta + (y0 - 1) * gamma <= w + EPS:
                        lower = max(lower, vec[i10])
                    if -dz * beta + y0 * gamma > w + EPS:
                        upper = min(upper, 1.0 - vec[i01])
                worst = min(worst, upper - lower)
        points.append(GridPoint(idx, vals, None, worst >= -EPS, worst))
    axes = tuple((n, tuple(float(v) for v in theta_grid[n])) for n in theta_grid)
    return IdentifiedSetGrid(axes=axes, points=tuple(points), kind="profile")


# ---------------------------------------------------------------------------
# Linear panel closed form
# ---------------------------------------------------------------------------


def linear_panel_beta(moments: Iterable[tuple[float, float]], tol: float = 1e-8) -> float:
    """Slope from differenced conditional means, one (E[dY|z], dz) per cell.

    Point identifying as soon as one cell moves the covariate; cells with
    dz = 0 must show a zero differenced mean, and moving cells must agree on
    the implied slope to within ``tol``.
    """
    moving = []
    for e_dy, dz in moments:
        if dz == 0:
            if abs(e_dy) > tol:
                raise ValueError(
                    "mean-independence violated: zero covariate change with nonzero outcome change"
                )
        else:
            moving.append(e_dy / dz)
    if not moving:
        raise ValueError("not point identified: the covariate never changes")
    if max(moving) - min(moving) > tol:
        raise ValueError("cells disagree on the slope beyond tolerance")
    return sum(moving) / len(moving)
