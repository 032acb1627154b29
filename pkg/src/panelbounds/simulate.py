"""DGP harness: draw latents with unrestricted covariation, roll outcomes
forward, and tabulate exact conditional outcome laws.

The unit-level latents are deliberately allowed to depend on everything the
identification theory leaves free: the location of the fixed effect can load
on the covariate path and on the realized time-varying latents, and a latent
initial condition can load on the fixed effect.  Nothing downstream is
entitled to assume otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.stats import multivariate_normal

from .distributions import CondOutcomeDist, LatentDist
from .models import CovariateCell, ModelSpec, Theta, enumerate_outcomes


@dataclass(frozen=True)
class DgpSpec:
    """Fully specified data-generating process.

    ``v_dist`` configures the unit-level latents:
      c:  {"base", "z_coef", "u_coef", "sd", "mix_shift", "mix_prob"}
          fixed effect: normal (or two-component mixture) whose mean loads on
          the average covariate and the average time-varying latent
      y0: {"base", "c_coef", "z_coef"} logistic initial condition (dynamic
          families; for the censored family the same keys parameterize a
          normal initial level with unit variance)
      y3: {"base", "sd", "u_coef"} censoring thresholds (censored family)
      v2: like c, for the second simultaneous-equation fixed effect
    """

    model: ModelSpec
    theta: Theta
    G: LatentDist
    cells: tuple[tuple[CovariateCell, float], ...]
    v_dist: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    selection: str = "max"
    tie_high: bool = True

    def __post_init__(self):
        if self.G.family not in ("gaussian_iid", "gaussian_corr"):
            raise ValueError("simulation draws the time-varying latents from a Gaussian family")
        w = sum(weight for _, weight in self.cells)
        if not self.cells or abs(w - 1.0) > 1e-9:
            raise ValueError("cell weights must sum to one")
        self.theta.validate_for(self.model)

    @staticmethod
    def from_dict(d: dict) -> "DgpSpec":
        allowed = {"model", "theta", "gu", "cells", "v_dist", "selection", "tie_high"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown DgpSpec keys: {sorted(unknown)}")
        model = ModelSpec.from_dict(d["model"])
        theta = Theta.from_dict(d["theta"])
        G = LatentDist.from_dict(d["gu"])
        cells = tuple(
            (CovariateCell(tuple(tuple(r) for r in c["z"]), cell_id=i, y2=tuple(c["y2"]) if c.get("y2") else None), float(c["weight"]))
        for i, c in enumerate(d["cells"])
        )
        return DgpSpec(
            model=model,
            theta=theta,
            G=G,
            cells=cells,
            v_dist=d.get("v_dist", {}),
            selection=d.get("selection", "max"),
            tie_high=bool(d.get("tie_high", True)),
        )


def _u_cov(model: ModelSpec, G: LatentDist) -> np.ndarray:
    sigma = float(G.params[0])
    rho = float(G.params[1]) if G.family == "gaussian_corr" else 0.0
    T = model.T
    return np.array([[sigma**2 * rho ** abs(t - s) for s in range(T)] for t in range(T)])


def _draw_unit_latents(dgp: DgpSpec, cell: CovariateCell, n: int, rng: np.random.Generator):
    """(u draws, fixed effects, initial conditions, censoring thresholds)."""
    model = dgp.model
    T = model.T
    n_series = 1
    if model.family == "multidiscrete":
        n_series = model.n_choices
    elif model.family == "simultaneous_binary":
        n_series = 2
    cov = _u_cov(model, dgp.G)
    L = np.linalg.cholesky(cov)
    u = rng.standard_normal((n, n_series, T)) @ L.T  # series independent

    zbar = float(np.mean([float(sum(r)) for r in cell.z]))
    ubar = u.mean(axis=(1, 2))

    def unit_shift(cfg_key, default_base=0.0):
        cfg = dict(dgp.v_dist.get(cfg_key, {}))
        base = float(cfg.get("base", default_base))
        zc = float(cfg.get("z_coef", 0.0))
        uc = float(cfg.get("u_coef", 0.0))
        sd = float(cfg.get("sd", 1.0))
        c = base + zc * zbar + uc * ubar + sd * rng.standard_normal(n)
        shift = float(cfg.get("mix_shift", 0.0))
        prob = float(cfg.get("mix_prob", 0.0))
        if prob > 0:
            c = c + shift * (rng.random(n) < prob)
        return c

    c = unit_shift("c")
    v2 = None
    if model.family == "simultaneous_binary" or (
        model.family == "multidiscrete" and model.n_choices >= 3
    ):
        v2 = unit_shift("v2")

    y0 = None
    if model.y0_status in ("observed", "unobserved") and model.family != "censored":
        cfg = dict(dgp.v_dist.get("y0", {}))
        logits = (
            float(cfg.get("base", 0.0))
            + float(cfg.get("c_coef", 0.0)) * c
            + float(cfg.get("z_coef", 0.0)) * zbar
        )
        p = 1.0 / (1.0 + np.exp(-logits))
        levels = model.n_choices if model.family == "ordered" else 2
        y0 = np.minimum((p[:, None] > rng.random((n, levels - 1))).sum(axis=1), levels - 1)
    if model.family == "censored" and model.y0_status != "absent":
        cfg = dict(dgp.v_dist.get("y0", {}))
        y0 = (
            float(cfg.get("base", 0.0))
            + float(cfg.get("c_coef", 0.0)) * c
            + rng.standard_normal(n)
        )

    y3 = None
    if model.family == "censored":
        cfg = dict(dgp.v_dist.get("y3", {}))
        y3 = (
            float(cfg.get("base", 0.0))
            + float(cfg.get("sd", 0.0)) * rng.standard_normal((n, T))
            + float(cfg.get("u_coef", 0.0)) * u[:, 0, :]
        )
    return u, c, v2, y0, y3


def _roll_forward(dgp: DgpSpec, cell: CovariateCell, u, c, v2, y0, y3):
    """Vectorized structural forward pass; returns integer outcome codes."""
    model = dgp.model
    theta = dgp.theta
    T = model.T
    n = u.shape[0]
    zb = [float(sum(zz * bb for zz, bb in zip(cell.z[t], theta.beta))) for t in range(T)] if not isinstance(theta.beta[0] if theta.beta else 0, tuple) else None

    if model.family in ("binary_static", "binary_dynamic"):
        alpha = float(theta.alpha[0]) if theta.alpha else 0.0
        gamma = float(theta.gamma[0]) if theta.gamma else 0.0
        lag = y0.astype(float) if y0 is not None else np.zeros(n)
        ys = np.zeros((n, T), dtype=int)
        for t in range(T):
            a_term = alpha * float(cell.y2[t]) if theta.alpha else 0.0
            index = a_term + zb[t] + gamma * lag + c + u[:, 0, t]
            ys[:, t] = (index >= 0).astype(int) if dgp.tie_high else (index > 0).astype(int)
            lag = ys[:, t].astype(float)
        return ys, y0

    if model.family == "ordered":
        cuts = np.array([float(x) for x in theta.cuts])
        dynamic = model.y0_status != "absent"
        gammas = np.array([float(g) for g in theta.gamma]) if theta.gamma else np.zeros(model.n_choices)
        lag = y0.astype(int) if y0 is not None else np.zeros(n, dtype=int)
        ys = np.zeros((n, T), dtype=int)
        for t in range(T):
            gcontrib = gammas[lag] if dynamic and theta.gamma is not None and len(gammas) > 1 else (
                (float(theta.gamma[0]) * lag) if dynamic and theta.gamma else 0.0
            )
            index = zb[t] + gcontrib + c + u[:, 0, t]
            side = "right" if dgp.tie_high else "left"
            ys[:, t] = np.searchsorted(cuts, index, side=side)
            lag = ys[:, t]
        return ys, y0

    if model.family == "multidiscrete":
        K = model.n_choices
        zbm = [
            [float(sum(zz * bb for zz, bb in zip(cell.z[t], theta.beta[d]))) for t in range(T)]
            for d in range(K - 1)
        ]
        ys = np.zeros((n, T), dtype=int)
        v_draws = np.zeros((n, K - 1))
        v_draws[:, 0] = c
        if K > 2:
            v_draws[:, 1] = v2 if v2 is not None else c
        for t in range(T):
            utils = np.zeros((n, K))
            for d in range(K):
                base = zbm[d][t] if d < K - 1 else 0.0
                v_part = v_draws[:, d] if d < K - 1 else 0.0
                utils[:, d] = base + v_part + u[:, d, t]
            if dgp.tie_high:
                ys[:, t] = K - 1 - np.argmax(utils[:, ::-1], axis=1) + 1
            else:
                ys[:, t] = np.argmax(utils, axis=1) + 1
        return ys, None

    if model.family == "simultaneous_binary":
        a1, a2 = (float(a) for a in theta.alpha)
        zb1 = [float(sum(zz * bb for zz, bb in zip(cell.z[t], theta.beta[0]))) for t in range(T)]
        zb2 = [float(sum(zz * bb for zz, bb in zip(cell.z[t], theta.beta[1]))) for t in range(T)]
        y1s = np.zeros((n, T), dtype=int)
        y2s = np.zeros((n, T), dtype=int)
        prefer = ((1, 1), (1, 0), (0, 1), (0, 0)) if dgp.selection == "max" else (
            (0, 0), (0, 1), (1, 0), (1, 1)
        )
        for t in range(T):
            i1 = {k: a1 * k2 + zb1[t] + c + u[:, 0, t] for k, k2 in ((0, 0), (1, 1))}
            i2 = {k: a2 * k1 + zb2[t] + v2 + u[:, 1, t] for k, k1 in ((0, 0), (1, 1))}
            feas = {}
            for cand1, cand2 in prefer:
                f1 = i1[cand2] >= 0 if cand1 == 1 else i1[cand2] <= 0
                f2 = i2[cand1] >= 0 if cand2 == 1 else i2[cand1] <= 0
                feas[(cand1, cand2)] = f1 & f2
            chosen = np.full(n, -1, dtype=int)
            for rank, key in enumerate(prefer):
                pick = (chosen < 0) & feas[key]
                chosen[pick] = rank
            if (chosen < 0).any():
                raise RuntimeError("no pure equilibrium: outside the supported sign regime")
            pref_arr = np.array(prefer)
            y1s[:, t] = pref_arr[chosen, 0]
            y2s[:, t] = pref_arr[chosen, 1]
        return np.concatenate([y1s, y2s], axis=1), None

    if model.family == "censored":
        alpha = float(theta.alpha[0]) if theta.alpha else 0.0
        gamma = float(theta.gamma[0]) if theta.gamma else 0.0
        lag = y0 if y0 is not None else np.zeros(n)
        y1 = np.zeros((n, T))
        w = np.zeros((n, T), dtype=int)
        for t in range(T):
            a_term = alpha * float(cell.y2[t]) if theta.alpha else 0.0
            index = a_term + zb[t] + gamma * lag + c + u[:, 0, t]
            y1[:, t] = np.maximum(index, y3[:, t])
            w[:, t] = (index <= y3[:, t]).astype(int)
            lag = y1[:, t]
        return (y1, w), y0

    raise ValueError(f"cannot simulate family {model.family!r}")


def _unit_counts(dgp: DgpSpec, n_units: int, rng: np.random.Generator) -> list[int]:
    weights = np.array([w for _, w in dgp.cells])
    return list(rng.multinomial(n_units, weights))


def simulate_panel(dgp: DgpSpec, n_units: int, seed: int, path: str) -> str:
    """Draw a balanced panel and write it as CSV (sorted by unit, period)."""
    if n_units < 1:
        raise ValueError("need at least one unit")
    model = dgp.model
    T = model.T
    ses = model.family == "simultaneous_binary"
    rng = np.random.default_rng(np.random.SeedSequence((seed, 311)))
    counts = _unit_counts(dgp, n_units, rng)

    fields = ["unit", "period"]
    if ses:
        fields += ["y1", "y2"]
    elif model.family == "censored":
        fields += ["y1", "w", "y3"]
    else:
        fields += ["y"]
    fields += [f"z{k+1}" for k in range(model.dim_z)]
    if model.y0_status == "observed":
        fields += ["y0"]
    if dgp.cells[0][0].y2 is not None and not ses:
        fields += ["y2"]

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        unit_id = 0
        for (cell, _), n_c in zip(dgp.cells, counts):
            if n_c == 0:
                continue
            cell_rng = np.random.default_rng(np.random.SeedSequence((seed, 701, cell.cell_id)))
            u, c, v2, y0, y3 = _draw_unit_latents(dgp, cell, n_c, cell_rng)
            rolled, y0_out = _roll_forward(dgp, cell, u, c, v2, y0, y3)
            for i in range(n_c):
                for t in range(T):
                    rec = {"unit": unit_id, "period": t + 1}
                    if ses:
                        rec["y1"] = int(rolled[i, t])
                        rec["y2"] = int(rolled[i, T + t])
                    elif model.family == "censored":
                        y1m, wm = rolled
                        rec["y1"] = f"{y1m[i, t]:.9g}"
                        rec["w"] = int(wm[i, t])
                        rec["y3"] = f"{y3[i, t]:.9g}"
                    else:
                        rec["y"] = int(rolled[i, t])
                    for k in range(model.dim_z):
                        rec[f"z{k+1}"] = str(cell.z[t][k])
                    if model.y0_status == "observed":
                        rec["y0"] = (
                            f"{y0_out[i]:.9g}" if model.family == "censored" else int(y0_out[i])
                        )
                    if cell.y2 is not None and not ses:
                        rec["y2"] = str(cell.y2[t])
                    writer.writerow(rec)
                unit_id += 1
    return path


def exact_F(dgp: DgpSpec, n_draws: int = 1_000_000, seed_base: int = 4040) -> CondOutcomeDist:
    """Population outcome law per cell by high-draw Monte Carlo.

    Returns per-(cell, initial condition) probability vectors; standard
    errors are in ``std_errors`` keyed the same way.
    """
    model = dgp.model
    outcomes = enumerate_outcomes(model)
    probs: dict[tuple[int, Optional[int]], tuple[float, ...]] = {}
    ses_: dict[tuple[int, Optional[int]], tuple[float, ...]] = {}
    n_map: dict[tuple[int, Optional[int]], int] = {}
    for cell, _ in dgp.cells:
        rng = np.random.default_rng(np.random.SeedSequence((seed_base, 977, cell.cell_id)))
        u, c, v2, y0, y3 = _draw_unit_latents(dgp, cell, n_draws, rng)
        rolled, y0_out = _roll_forward(dgp, cell, u, c, v2, y0, y3)
        if model.family == "censored":
            _, wm = rolled
            codes = _pack_codes(model, wm)
            groups = {None: np.arange(n_draws)}
        else:
            digits = rolled - 1 if model.family == "multidiscrete" else rolled
            codes = _pack_codes(model, digits)
            if model.y0_status == "observed":
                groups = {int(v): np.flatnonzero(y0_out == v) for v in np.unique(y0_out)}
            else:
                groups = {None: np.arange(n_draws)}
        for y0v, sel in sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0])):
            m = len(sel)
            if m == 0:
                continue
            vec = np.bincount(codes[sel], minlength=len(outcomes)).astype(float)
            p = vec / m
            probs[(cell.cell_id, y0v)] = tuple(float(x) for x in p)
            ses_[(cell.cell_id, y0v)] = tuple(
                float(math.sqrt(max(x * (1 - x), 1e-12) / m)) for x in p
            )
            n_map[(cell.cell_id, y0v)] = m
    F = CondOutcomeDist(
        model=model,
        outcomes=tuple(outcomes),
        cells=tuple(c for c, _ in dgp.cells),
        probs=probs,
        n_units=n_map,
    )
    object.__setattr__(F, "std_errors", ses_)
    return F


def _pack_codes(model: ModelSpec, arr: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each outcome row in the enumeration order."""
    base = {
        "binary_static": 2,
        "binary_dynamic": 2,
        "ordered": model.n_choices,
        "multidiscrete": model.n_choices,
        "simultaneous_binary": 2,
        "censored": 2,
    }[model.family]
    L = arr.shape[1]
    places = base ** np.arange(L - 1, -1, -1)
    return (arr.astype(np.int64) @ places).astype(np.int64)


def exact_F_2p_binary_orthant(dgp: DgpSpec) -> dict[tuple[int, int], tuple[float, ...]]:
    """Closed-form two-period binary law via bivariate normal orthants.

    Valid when the fixed effect is Gaussian and independent of (z, u); used
    as the cross-check oracle for the Monte Carlo tabulation.
    """
    model = dgp.model
    if model.family not in ("binary_static", "binary_dynamic") or model.T != 2:
        raise ValueError("orthant closed form covers the two-period binary case")
    cfg = dict(dgp.v_dist.get("c", {}))
    if float(cfg.get("u_coef", 0.0)) != 0.0 or float(cfg.get("mix_prob", 0.0)) != 0.0:
        raise ValueError("closed form needs a Gaussian fixed effect independent of u")
    y0cfg = dict(dgp.v_dist.get("y0", {}))
    if model.y0_status == "observed" and float(y0cfg.get("c_coef", 0.0)) != 0.0:
        raise ValueError(
            "conditioning on the initial condition: the closed form needs it independent of the fixed effect"
        )
    sc = float(cfg.get("sd", 1.0))
    theta = dgp.theta
    sigma = float(dgp.G.params[0])
    gamma = float(theta.gamma[0]) if theta.gamma else 0.0
    out = {}
    for cell, _ in dgp.cells:
        zb = [float(sum(zz * bb for zz, bb in zip(cell.z[t], theta.beta))) for t in range(2)]
        zbar = float(np.mean([float(sum(r)) for r in cell.z]))
        mc = float(cfg.get("base", 0.0)) + float(cfg.get("z_coef", 0.0)) * zbar
        cov = np.array([[sc**2 + sigma**2, sc**2], [sc**2, sc**2 + sigma**2]])
        for y0 in (0, 1) if model.y0_status == "observed" else (None,):
            vec = []
            for y1 in (0, 1):
                for y2 in (0, 1):
                    lo = [-np.inf, -np.inf]
                    hi = [np.inf, np.inf]
                    m1 = zb[0] + gamma * (y0 or 0) + mc
                    m2 = zb[1] + gamma * y1 + mc
                    for j, (yv, mv) in enumerate(((y1, m1), (y2, m2))):
                        if yv == 1:
                            lo[j] = -mv
                        else:
                            hi[j] = -mv
                    p = _mvn_box(np.array(lo), np.array(hi), cov)
                    vec.append(p)
            out[(cell.cell_id, y0)] = tuple(vec)
    return out


def _mvn_box(lo, hi, cov) -> float:
    """P[lo <= X <= hi] for centered bivariate normal via inclusion-exclusion."""
    mvn = multivariate_normal(mean=[0.0, 0.0], cov=cov, allow_singular=True)

    def cdf(x):
        if np.any(np.isneginf(x)):
            return 0.0
        return float(mvn.cdf(np.minimum(x, 1e10)))

    return (
        cdf([hi[0], hi[1]])
        - cdf([lo[0], hi[1]])
        - cdf([hi[0], lo[1]])
        + cdf([lo[0], lo[1]])
    )
