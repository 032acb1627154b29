"""Latent-variable distributions and observed conditional outcome laws.

``measure`` answers the only probabilistic question the checking machinery
asks: the mass a latent law assigns to a union of polyhedra in differenced-u
coordinates.  One-dimensional Gaussian cases are exact (interval unions of
normal CDF differences); higher dimensions use fixed-seed Monte Carlo with a
reported standard error; finite grids are exact rational sums and feed the
brute-force oracle.

``estimate_F`` turns a balanced panel CSV into per-cell outcome frequency
vectors; ``exact`` conditional laws come from :mod:`panelbounds.simulate`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .models import CovariateCell, ModelSpec, OutcomeSeq, enumerate_outcomes
from .polyhedra import LE, LT, EQ, LinIneqSystem, RegionUnion, as_union


@dataclass(frozen=True)
class MeasureResult:
    estimate: float
    std_error: float
    n_draws: int
    exact: bool

    def __float__(self):
        return self.estimate

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n_draws": self.n_draws,
            "exact": self.exact,
        }


@dataclass(frozen=True)
class LatentDist:
    """Law of the time-varying latents.

    families:
      gaussian_iid   params = (sigma,)
      gaussian_corr  params = (sigma, rho)      stationary AR(1) correlation
      discrete_grid  support/weights in differenced-u coordinates (oracles)
      piecewise_uniform  1-d law for a scalar difference: nodes + weights,
                         linear CDF between nodes (used by the profile-bound
                         equivalence scans)
    ``per_z`` optionally overrides params per cell id.
    """

    family: str
    params: tuple = ()
    support: tuple = ()
    weights: tuple = ()
    nodes: tuple = ()
    per_z: Optional[Mapping[int, tuple]] = None

    def __post_init__(self):
        if self.family not in ("gaussian_iid", "gaussian_corr", "discrete_grid", "piecewise_uniform"):
            raise ValueError(f"unknown latent family {self.family!r}")
        if self.family == "gaussian_iid":
            if len(self.params) != 1 or self.params[0] <= 0:
                raise ValueError("gaussian_iid takes params = (sigma > 0,)")
        if self.family == "gaussian_corr":
            if len(self.params) != 2 or self.params[0] <= 0 or abs(self.params[1]) >= 1:
                raise ValueError("gaussian_corr takes (sigma > 0, |rho| < 1)")
        if self.family == "discrete_grid":
            if not self.support or len(self.support) != len(self.weights):
                raise ValueError("discrete_grid needs matching support and weights")
            tot = sum(Fraction(w) for w in self.weights)
            if any(Fraction(w) < 0 for w in self.weights) or tot != 1:
                raise ValueError("weights must be nonnegative and sum to one")
        if self.family == "piecewise_uniform":
            if len(self.nodes) != len(self.weights) + 1:
                raise ValueError("need one more node than interval weight")
            if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
                raise ValueError("nodes must increase")
            tot = sum(float(w) for w in self.weights)
            if any(float(w) < 0 for w in self.weights) or abs(tot - 1) > 1e-12:
                raise ValueError("interval weights must be a probability vector")

    def resolved_params(self, cell_id: Optional[int]) -> tuple:
        if self.per_z and cell_id in self.per_z:
            return tuple(self.per_z[cell_id])
        return self.params

    @staticmethod
    def from_dict(d: dict) -> "LatentDist":
        allowed = {"family", "params", "support", "weights", "nodes", "per_z"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown LatentDist keys: {sorted(unknown)}")
        kw = dict(d)
        for key in ("params", "weights", "nodes"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "support" in kw:
            kw["support"] = tuple(tuple(p) for p in kw["support"])
        if "per_z" in kw and kw["per_z"] is not None:
            kw["per_z"] = {int(k): tuple(v) for k, v in kw["per_z"].items()}
        return LatentDist(**kw)


def delta_covariance(model: ModelSpec, coords: Sequence[str], sigma: float, rho: float = 0.0) -> np.ndarray:
    """Covariance of the differenced coordinates under per-series AR(1) noise."""
    T = model.T
    base = np.array(
        [[sigma**2 * rho ** abs(t - s) for s in range(T)] for t in range(T)]
    )

    def diff_row(t):
        row = np.zeros(T)
        row[t - 1] = 1.0
        row[0] -= 1.0
        return row

    cov = np.zeros((len(coords), len(coords)))
    loadings = []
    for c in coords:
        series, t = _parse_delta(c)
        loadings.append((series, diff_row(t)))
    for i, (si, ri) in enumerate(loadings):
        for j, (sj, rj) in enumerate(loadings):
            if si != sj:
                continue  # independent series
            cov[i, j] = ri @ base @ rj
    return cov


def _parse_delta(coord: str) -> tuple[str, int]:
    # du{t}1 for single-series, du{d} (T=2) or du{d}_{t} for multi-series
    if "_" in coord:
        head, t = coord.split("_")
        return head, int(t)
    if coord.startswith("du") and coord.endswith("1") and len(coord) == 4:
        return "u", int(coord[2])
    return coord, 2


def region_matrix(region: RegionUnion | LinIneqSystem, coords: Sequence[str]):
    """Float (A, rel, b) triples per part for vectorized membership."""
    union = as_union(region)
    out = []
    for part in union.parts:
        A = np.zeros((len(part.rows), len(coords)))
        b = np.zeros(len(part.rows))
        rels = []
        for i, r in enumerate(part.rows):
            for k, v in r.terms:
                if k not in coords:
                    raise KeyError(f"region coordinate {k!r} unknown to the latent law")
                A[i, coords.index(k)] = float(v)
            b[i] = float(r.rhs)
            rels.append(r.rel)
        out.append((A, rels, b))
    return out


def membership_mask(parts, X: np.ndarray) -> np.ndarray:
    """Boolean membership of draw matrix ``X`` (n x d) in a part list."""
    n = X.shape[0]
    mask = np.zeros(n, dtype=bool)
    for A, rels, b in parts:
        vals = X @ A.T
        ok = np.ones(n, dtype=bool)
        for i, rel in enumerate(rels):
            if rel == LE:
                ok &= vals[:, i] <= b[i]
            elif rel == LT:
                ok &= vals[:, i] < b[i]
            else:
                ok &= vals[:, i] == b[i]
        mask |= ok
    return mask


def _mc_seed(seed_base: int, cell_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed_base, 977, cell_id)))


_draw_cache: dict[tuple, np.ndarray] = {}


def gaussian_delta_draws(
    model: ModelSpec,
    coords: tuple[str, ...],
    sigma: float,
    rho: float,
    n_draws: int,
    seed_base: int,
    cell_id: int,
) -> np.ndarray:
    """Common-random-number draws of the differenced latents for one cell."""
    key = (model.family, model.T, coords, float(sigma), float(rho), n_draws, seed_base, cell_id)
    hit = _draw_cache.get(key)
    if hit is not None:
        return hit
    cov = delta_covariance(model, coords, sigma, rho)
    rng = _mc_seed(seed_base, cell_id)
    L = np.linalg.cholesky(cov + 1e-12 * np.eye(len(coords)))
    X = rng.standard_normal((n_draws, len(coords))) @ L.T
    if len(_draw_cache) > 32:
        _draw_cache.clear()
    _draw_cache[key] = X
    return X


def measure(
    G: LatentDist,
    region: RegionUnion | LinIneqSystem,
    cell_id: int = 0,
    *,
    model: Optional[ModelSpec] = None,
    n_draws: int = 200_000,
    seed_base: int = 20250,
) -> MeasureResult:
    """P[differenced latents in region] under ``G``.

    Exact for one-dimensional Gaussian regions, finite grids, and piecewise
    uniform laws; otherwise fixed-seed Monte Carlo with common random
    numbers per (seed_base, cell).  Boundary (strict vs weak) is ignored for
    absolutely continuous families.
    """
    union = as_union(region)
    coords = tuple(c for c in union.coords)

    if G.family == "discrete_grid":
        total = Fraction(0)
        for point, w in zip(G.support, G.weights):
            pt = dict(zip(coords, (Fraction(str(x)) if not isinstance(x, (int, Fraction)) else Fraction(x) for x in point)))
            if union.satisfies(pt):
                total += Fraction(w)
        return MeasureResult(float(total), 0.0, 0, True)

    if G.family == "piecewise_uniform":
        if len(coords) != 1:
            raise ValueError("piecewise_uniform is a scalar-difference law")
        intervals = _interval_union(union)
        p = sum(_pw_cdf(G, b) - _pw_cdf(G, a) for a, b in intervals)
        return MeasureResult(float(p), 0.0, 0, True)

    params = G.resolved_params(cell_id)
    sigma = float(params[0])
    rho = float(params[1]) if G.family == "gaussian_corr" else 0.0
    if model is None:
        raise ValueError("gaussian families need the model for the horizon layout")
    from .models import delta_coords

    unknown = set(coords) - set(delta_coords(model))
    if unknown:
        raise KeyError(f"region coordinates unknown to the latent law: {sorted(unknown)}")

    if len(coords) == 1:
        var = delta_covariance(model, coords, sigma, rho)[0, 0]
        sd = math.sqrt(var)
        intervals = _interval_union(union)
        p = sum(
            norm.cdf(b / sd if b != math.inf else math.inf)
            - norm.cdf(a / sd if a != -math.inf else -math.inf)
            for a, b in intervals
        )
        return MeasureResult(float(min(max(p, 0.0), 1.0)), 0.0, 0, True)

    X = gaussian_delta_draws(model, coords, sigma, rho, n_draws, seed_base, cell_id)
    mask = membership_mask(region_matrix(union, coords), X)
    p = float(mask.mean())
    se = math.sqrt(max(p * (1 - p), 1e-12) / n_draws)
    return MeasureResult(p, se, n_draws, False)


def _interval_union(union: RegionUnion) -> list[tuple[float, float]]:
    """Merge one-dimensional parts into disjoint closed intervals."""
    raw = []
    for part in union.parts:
        lo, hi = -math.inf, math.inf
        infeasible = False
        for r in part.rows:
            if not r.terms:
                if not r.constant_holds():
                    infeasible = True
                continue
            (name, a), = r.terms
            bound = float(r.rhs) / float(a)
            if r.rel == EQ:
                lo, hi = max(lo, bound), min(hi, bound)
            elif a > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
        if not infeasible and lo <= hi:
            raw.append((lo, hi))
    raw.sort()
    merged: list[tuple[float, float]] = []
    for lo, hi in raw:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _pw_cdf(G: LatentDist, x: float) -> float:
    nodes = [float(v) for v in G.nodes]
    weights = [float(w) for w in G.weights]
    if x <= nodes[0]:
        return 0.0
    if x >= nodes[-1]:
        return 1.0
    acc = 0.0
    for (a, b), w in zip(zip(nodes, nodes[1:]), weights):
        if x >= b:
            acc += w
        elif x > a:
            acc += w * (x - a) / (b - a)
            break
        else:
            break
    return acc


# ---------------------------------------------------------------------------
# Observed conditional outcome distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CondOutcomeDist:
    """F_{Y|Z}: per covariate cell (optionally per initial condition), a
    probability vector over the enumerated outcome order."""

    model: ModelSpec
    outcomes: tuple[OutcomeSeq, ...]
    cells: tuple[CovariateCell, ...]
    probs: Mapping[tuple[int, Optional[int]], tuple[float, ...]]
    n_units: Optional[Mapping[tuple[int, Optional[int]], int]] = None
    flagged_cells: tuple = ()

    def __post_init__(self):
        for key, vec in self.probs.items():
            if len(vec) != len(self.outcomes):
                raise ValueError("probability vector length mismatch")
            if any(p < -1e-12 for p in vec) or abs(sum(vec) - 1.0) > 1e-12:
                raise ValueError(f"cell {key}: probabilities must sum to one")

    @property
    def y0_values(self) -> tuple:
        vals = sorted({k[1] for k in self.probs}, key=lambda v: (v is None, v))
        return tuple(vals)

    def vector(self, cell_id: int, y0: Optional[int] = None) -> tuple[float, ...]:
        key = (cell_id, y0)
        if key not in self.probs:
            raise KeyError(f"unknown cell {key}")
        return self.probs[key]

    def cell_by_id(self, cell_id: int) -> CovariateCell:
        for c in self.cells:
            if c.cell_id == cell_id:
                return c
        raise KeyError(f"unknown cell id {cell_id}")


def prob_Y_in(F: CondOutcomeDist, cell_id: int, Y_set: Iterable[OutcomeSeq], y0=None) -> float:
    """Sum of cell probabilities over an outcome collection."""
    vec = F.vector(cell_id, y0)
    index = {o: i for i, o in enumerate(F.outcomes)}
    total = 0.0
    for y in Y_set:
        base = OutcomeSeq(y.y, None, y.w, y.y1vals, y.y2vals, y.y3vals)
        if base not in index:
            raise KeyError(f"outcome {y.label()} outside the enumerated support")
        total += vec[index[base]]
    return total


class PanelFormatError(ValueError):
    pass


def estimate_F(path: str, model: ModelSpec, min_units: int = 30) -> CondOutcomeDist:
    """Empirical conditional outcome frequencies from a balanced panel CSV.

    Expected columns: ``unit``, ``period``, outcome columns (``y`` or
    ``y1``/``y2`` for the simultaneous family), covariates ``z1..zk``,
    optional ``y0``, ``y2``(endogenous regressor), ``w``, ``y3``.  Each
    distinct (z path, y2 path, y0) is a cell; cells with fewer than
    ``min_units`` units are flagged, not dropped.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PanelFormatError("empty panel file")
        for i, rec in enumerate(reader, start=2):
            rec["_line"] = i
            rows.append(rec)
    if not rows:
        raise PanelFormatError("panel has no data rows")

    zcols = sorted(
        (c for c in rows[0] if c.startswith("z") and c[1:].isdigit()),
        key=lambda c: int(c[1:]),
    )
    if len(zcols) < model.dim_z:
        raise PanelFormatError(f"need {model.dim_z} covariate columns, found {len(zcols)}")
    ses = model.family == "simultaneous_binary"

    units: dict[str, dict[int, dict]] = {}
    for rec in rows:
        try:
            unit = rec["unit"]
            period = int(rec["period"])
        except (KeyError, TypeError, ValueError):
            raise PanelFormatError(f"line {rec['_line']}: malformed unit/period")
        if not 1 <= period <= model.T:
            raise PanelFormatError(f"line {rec['_line']}: period {period} outside 1..{model.T}")
        store = units.setdefault(unit, {})
        if period in store:
            raise PanelFormatError(f"line {rec['_line']}: duplicate period for unit {unit}")
        store[period] = rec

    for unit, recs in units.items():
        if len(recs) != model.T:
            missing = sorted(set(range(1, model.T + 1)) - set(recs))
            raise PanelFormatError(f"unbalanced panel: unit {unit} missing periods {missing}")

    counts: dict[tuple, dict[OutcomeSeq, int]] = {}
    cell_index: dict[tuple, CovariateCell] = {}
    outcome_list = enumerate_outcomes(model)
    outcome_pos = {o: i for i, o in enumerate(outcome_list)}

    for unit, recs in sorted(units.items()):
        try:
            zpath = tuple(
                tuple(Fraction(recs[t][c]) for c in zcols[: model.dim_z])
                for t in range(1, model.T + 1)
            )
        except (ValueError, ZeroDivisionError):
            raise PanelFormatError(f"unit {unit}: non-numeric covariate")
        y2path = None
        if "y2" in recs[1] and recs[1].get("y2") not in (None, "") and not ses:
            y2path = tuple(Fraction(recs[t]["y2"]) for t in range(1, model.T + 1))
        y0 = None
        if recs[1].get("y0") not in (None, "") and model.family != "censored":
            # censored initial conditions are continuous levels, not cells
            y0 = int(recs[1]["y0"])
        if ses:
            try:
                y = tuple(int(recs[t]["y1"]) for t in range(1, model.T + 1)) + tuple(
                    int(recs[t]["y2"]) for t in range(1, model.T + 1)
                )
            except (KeyError, ValueError):
                raise PanelFormatError(f"unit {unit}: simultaneous outcomes need y1 and y2")
        elif model.family == "censored":
            y = ()
        else:
            try:
                y = tuple(int(recs[t]["y"]) for t in range(1, model.T + 1))
            except (KeyError, ValueError):
                raise PanelFormatError(f"unit {unit}: missing outcome column y")
        if model.family == "censored":
            w = tuple(int(recs[t]["w"]) for t in range(1, model.T + 1))
            outcome = OutcomeSeq((), w=w)
        else:
            outcome = OutcomeSeq(y)
        if outcome not in outcome_pos:
            raise PanelFormatError(f"unit {unit}: outcome {outcome.label()} outside the family range")

        cell_key = (zpath, y2path)
        if cell_key not in cell_index:
            cell_index[cell_key] = CovariateCell(zpath, cell_id=len(cell_index), y2=y2path)
        bucket = counts.setdefault((cell_key, y0), {})
        bucket[outcome] = bucket.get(outcome, 0) + 1

    probs: dict[tuple[int, Optional[int]], tuple[float, ...]] = {}
    n_units_map: dict[tuple[int, Optional[int]], int] = {}
    flagged = []
    cells = sorted(cell_index.values(), key=lambda c: c.cell_id)
    for (cell_key, y0), bucket in sorted(
        counts.items(), key=lambda kv: (cell_index[kv[0][0]].cell_id, str(kv[0][1]))
    ):
        cell = cell_index[cell_key]
        total = sum(bucket.values())
        vec = tuple(bucket.get(o, 0) / total for o in outcome_list)
        probs[(cell.cell_id, y0)] = vec
        n_units_map[(cell.cell_id, y0)] = total
        if total < min_units:
            flagged.append((cell.cell_id, y0))
    return CondOutcomeDist(
        model=model,
        outcomes=tuple(outcome_list),
        cells=tuple(cells),
        probs=probs,
        n_units=n_units_map,
        flagged_cells=tuple(flagged),
    )
