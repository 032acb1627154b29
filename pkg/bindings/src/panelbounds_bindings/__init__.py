"""Scripting bindings for the panel identification engine.

Every call accepts plain mappings that mirror the engine's JSON schemas,
round-trips through the primary implementation, and returns plain mappings,
lists, and strings.  No numerical logic lives here; validation and
diagnostics are the primary package's own.

    import panelbounds_bindings as pb
    report = pb.check_structure(model={...}, theta={...}, gu={...}, f="panel.csv")
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Optional, Sequence

from panelbounds import cli as _cli
from panelbounds import distributions as _dist
from panelbounds import identify as _identify
from panelbounds import models as _models
from panelbounds import randomsets as _randomsets
from panelbounds import simulate as _simulate
from panelbounds import tables as _tables

__all__ = [
    "bind_all",
    "check_structure",
    "core_determining_collection",
    "estimate_f",
    "identified_set_scan",
    "outer_set_scan",
    "profile_bounds",
    "simulate_panel",
    "tables",
    "ustar",
]


def _model(doc: Mapping) -> _models.ModelSpec:
    return _models.ModelSpec.from_dict(dict(doc))


def _theta(doc: Mapping) -> _models.Theta:
    return _models.Theta.from_dict(dict(doc))


def _gu(doc: Mapping):
    if "per_y0" in doc:
        return {int(k): _dist.LatentDist.from_dict(v) for k, v in doc["per_y0"].items()}
    return _dist.LatentDist.from_dict(dict(doc))


def _cell(doc: Mapping) -> _models.CovariateCell:
    from fractions import Fraction

    return _models.CovariateCell(
        tuple(tuple(Fraction(str(v)) for v in row) for row in doc["z"]),
        cell_id=int(doc.get("cell_id", 0)),
        y2=tuple(Fraction(str(v)) for v in doc["y2"]) if doc.get("y2") else None,
    )


def _f(f, model: _models.ModelSpec) -> _dist.CondOutcomeDist:
    if isinstance(f, str):
        return _cli.load_F(f, model)
    return _cli.cond_dist_from_doc(dict(f), model)


def ustar(model: Mapping, theta: Mapping, y: Sequence[int], z: Mapping, y0: Optional[int] = None) -> dict:
    """u-compatible set of one outcome path at a covariate cell."""
    m = _model(model)
    outcome = _models.OutcomeSeq(tuple(int(v) for v in y), y0=y0)
    us = _randomsets.ustar(m, _theta(theta), outcome, _cell(z))
    return {
        "outcome": list(outcome.y),
        "full": us.is_full,
        "region": [p.canonical_text() for p in us.region.parts],
    }


def core_determining_collection(
    model: Mapping, theta: Mapping, z: Mapping, y0: Optional[int] = None, cap: int = 12
) -> dict:
    m = _model(model)
    outcomes = None
    if y0 is not None:
        outcomes = [o.with_y0(y0) for o in _models.enumerate_outcomes(m)]
    res = _randomsets.core_determining_collection(
        m, _theta(theta), _cell(z), outcomes=outcomes, cap=cap
    )
    return {
        "n_distinct_parts": res.n_distinct_parts,
        "n_candidate_unions": res.n_candidate_unions,
        "items": [
            {
                "id": item.item_id,
                "T": [list(o.y) for o in item.t_set],
                "Y": [list(o.y) for o in item.y_set],
                "S": [p.canonical_text() for p in item.s_region.parts],
            }
            for item in res.items
        ],
    }


def check_structure(
    model: Mapping,
    theta: Mapping,
    gu: Mapping,
    f,
    tol: Optional[float] = None,
    seed: int = 20250,
    draws: int = 200_000,
) -> dict:
    m = _model(model)
    rep = _identify.check_structure(
        m, _theta(theta), _gu(gu), _f(f, m), tol=tol, n_draws=draws, seed_base=seed
    )
    return rep.to_json()


def identified_set_scan(
    model: Mapping,
    grid: Mapping,
    f,
    g_grid="piecewise_uniform_family",
    tol: Optional[float] = None,
    threads: int = 1,
    seed: int = 20250,
    draws: int = 200_000,
) -> dict:
    m = _model(model)
    if isinstance(g_grid, (list, tuple)):
        g_grid = [_dist.LatentDist.from_dict(d) for d in g_grid]
    out = _identify.identified_set_scan(
        m,
        grid["axes"] if "axes" in grid else grid,
        g_grid,
        _f(f, m),
        tol=tol,
        threads=threads,
        n_draws=draws,
        seed_base=seed,
    )
    return out.to_json()


def outer_set_scan(model: Mapping, grid: Mapping, f, tol: float = 0.0, threads: int = 1) -> dict:
    m = _model(model)
    out = _identify.outer_set_scan(
        m, grid["axes"] if "axes" in grid else grid, _f(f, m), tol=tol, threads=threads
    )
    return out.to_json()


def profile_bounds(model: Mapping, grid: Mapping, f, w_grid=None) -> dict:
    m = _model(model)
    out = _identify.profile_bounds_2p_binary(
        _f(f, m), grid["axes"] if "axes" in grid else grid, w_grid=w_grid
    )
    return out.to_json()


def simulate_panel(dgp: Mapping, n: int, seed: int, out: str) -> str:
    return _simulate.simulate_panel(_simulate.DgpSpec.from_dict(dict(dgp)), n, seed, out)


def estimate_f(path: str, model: Mapping, min_units: int = 30) -> dict:
    m = _model(model)
    F = _dist.estimate_F(path, m, min_units=min_units)
    return {
        "outcomes": [list(o.y) if o.y else list(o.w) for o in F.outcomes],
        "cells": [
            {"cell_id": c.cell_id, "z": [[str(v) for v in row] for row in c.z]}
            for c in F.cells
        ],
        "probs": {
            (f"{cid}|{y0}" if y0 is not None else str(cid)): list(vec)
            for (cid, y0), vec in F.probs.items()
        },
        "flagged_cells": [list(k) for k in F.flagged_cells],
    }


def tables(out_dir: Optional[str] = None, which: str = "all") -> dict[str, str]:
    """Regenerate the symbolic tables; optionally write them like the CLI."""
    texts = _tables.generate_all_tables(which)
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in texts.items():
            (d / f"{name}.txt").write_text(text)
    return texts


def bind_all(namespace) -> None:
    """Install the callable surface onto a module-like namespace."""
    for name in __all__:
        if name != "bind_all":
            setattr(namespace, name, globals()[name])
