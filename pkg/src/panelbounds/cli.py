"""Command-line front end: table regeneration/diffing and reproducible runs.

Exit status: 0 on success (all inequalities pass, golden diff clean),
1 on an inequality failure or golden mismatch, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import tables as tables_mod
from .distributions import CondOutcomeDist, LatentDist, estimate_F
from .identify import (
    check_structure,
    identified_set_scan,
    linear_panel_beta,
    outer_set_scan,
    profile_bounds_2p_binary,
)
from .models import CovariateCell, ModelSpec, Theta, enumerate_outcomes
from .randomsets import core_determining_collection, ustar
from .simulate import DgpSpec, simulate_panel


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _load_model(path: str) -> ModelSpec:
    return ModelSpec.from_dict(_load_json(path))


def _load_theta(path: str) -> Theta:
    return Theta.from_dict(_load_json(path))


def _load_gu(path: str):
    doc = _load_json(path)
    if "per_y0" in doc:
        return {int(k): LatentDist.from_dict(v) for k, v in doc["per_y0"].items()}
    return LatentDist.from_dict(doc)


def _load_cell(path: str) -> CovariateCell:
    doc = _load_json(path)
    return CovariateCell(
        tuple(tuple(Fraction(str(v)) for v in row) for row in doc["z"]),
        cell_id=int(doc.get("cell_id", 0)),
        y2=tuple(Fraction(str(v)) for v in doc["y2"]) if doc.get("y2") else None,
    )


def load_F(path: str, model: ModelSpec) -> CondOutcomeDist:
    """Panel CSV or an explicit JSON document of per-cell probabilities."""
    if path.endswith(".csv"):
        return estimate_F(path, model)
    return cond_dist_from_doc(_load_json(path), model)


def cond_dist_from_doc(doc: dict, model: ModelSpec) -> CondOutcomeDist:
    """Explicit conditional law: cells plus per-cell probability vectors,
    keyed ``"<cell>"`` or ``"<cell>|<y0>"`` in the enumerated outcome order."""
    cells = tuple(
        CovariateCell(
            tuple(tuple(Fraction(str(v)) for v in row) for row in c["z"]),
            cell_id=i,
            y2=tuple(Fraction(str(v)) for v in c["y2"]) if c.get("y2") else None,
        )
        for i, c in enumerate(doc["cells"])
    )
    probs = {}
    for key, vec in doc["probs"].items():
        if "|" in key:
            cid, y0 = key.split("|")
            probs[(int(cid), int(y0))] = tuple(float(x) for x in vec)
        else:
            probs[(int(key), None)] = tuple(float(x) for x in vec)
    return CondOutcomeDist(
        model=model,
        outcomes=tuple(enumerate_outcomes(model)),
        cells=cells,
        probs=probs,
    )


def _golden_text(name: str) -> str:
    return resources.files("panelbounds").joinpath(f"golden/{name}.txt").read_text()


def cmd_tables(args) -> int:
    names = tables_mod.GOLDEN_TABLES if args.which in (None, "all") else args.which.split(",")
    generated = {name: tables_mod.generate_table(name) for name in names}
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, text in generated.items():
            (outdir / f"{name}.txt").write_text(text)
        print(f"wrote {len(generated)} tables to {outdir}")
    if args.write_golden:
        gdir = Path(args.write_golden)
        gdir.mkdir(parents=True, exist_ok=True)
        for name, text in generated.items():
            (gdir / f"{name}.txt").write_text(text)
        print(f"refreshed {len(generated)} golden tables in {gdir}")
        return 0
    status = 0
    for name, text in generated.items():
        try:
            want = _golden_text(name)
        except FileNotFoundError:
            print(f"{name}: MISSING golden file")
            status = 1
            continue
        if text == want:
            print(f"{name}: ok ({len(text.splitlines())} lines)")
        else:
            print(f"{name}: DIFFERS from golden")
            status = 1
    return status


def cmd_ustar(args) -> int:
    model = _load_model(args.model)
    theta = _load_theta(args.theta)
    cell = _load_cell(args.z)
    lines = []
    for y in enumerate_outcomes(model):
        if args.y0 is not None:
            y = y.with_y0(args.y0)
        us = ustar(model, theta, y, cell)
        body = "FULL" if us.is_full else tables_mod.render_region(us.region)
        lines.append(f"{y.label()} | {body}")
    text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_cdc(args) -> int:
    model = _load_model(args.model)
    theta = _load_theta(args.theta)
    outcomes = None
    if args.y0 is not None:
        outcomes = [y.with_y0(args.y0) for y in enumerate_outcomes(model)]
    res = core_determining_collection(
        model, theta, _load_cell(args.z), outcomes=outcomes, cap=args.cap
    )
    lines = [
        f"# parts: {res.n_distinct_parts}, candidate unions: {res.n_candidate_unions}, retained: {len(res.items)}"
    ]
    for item in res.items:
        lines.append(
            f"{item.item_id} | Y={tables_mod._set_label(item.y_set)}"
            f" | T={tables_mod._set_label(item.t_set)}"
            + (" | S=" + tables_mod.render_region(item.s_region) if args.emit_table else "")
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_check(args) -> int:
    model = _load_model(args.model)
    theta = _load_theta(args.theta)
    G = _load_gu(args.gu)
    F = load_F(args.f, model)
    rep = check_structure(
        model, theta, G, F, tol=args.tol, n_draws=args.draws, seed_base=args.seed
    )
    _emit(json.dumps(rep.to_json(), indent=2) + "\n", args.out)
    print(f"pass={rep.passed} min_slack={rep.min_slack:.6g} tol={rep.tol:.6g}")
    return 0 if rep.passed else 1


def cmd_identify(args) -> int:
    model = _load_model(args.model)
    grid_doc = _load_json(args.grid)
    F = load_F(args.f, model)
    g_spec = grid_doc.get("g_grid", "piecewise_uniform_family")
    if isinstance(g_spec, list):
        G_grid = [LatentDist.from_dict(d) for d in g_spec]
    else:
        G_grid = g_spec
    grid = identified_set_scan(
        model,
        grid_doc["axes"],
        G_grid,
        F,
        tol=grid_doc.get("tol"),
        threads=args.threads,
        n_draws=args.draws,
        seed_base=args.seed,
    )
    _write_grid(grid, args.out)
    n_in = len(grid.in_points())
    print(f"identified scan: {n_in} in-points of {len(set(p.idx for p in grid.points))}")
    return 0


def cmd_outer(args) -> int:
    model = _load_model(args.model)
    grid_doc = _load_json(args.grid)
    F = load_F(args.f, model)
    grid = outer_set_scan(
        model, grid_doc["axes"], F, tol=grid_doc.get("tol", 0.0), threads=args.threads
    )
    _write_grid(grid, args.out)
    print(f"outer scan: {len(grid.in_points())} in-points")
    return 0


def cmd_profile(args) -> int:
    model = _load_model(args.model)
    grid_doc = _load_json(args.grid)
    F = load_F(args.f, model)
    grid = profile_bounds_2p_binary(F, grid_doc["axes"], w_grid=grid_doc.get("w_grid"))
    _write_grid(grid, args.out)
    print(f"profile bounds: {len(grid.in_points())} in-points")
    return 0


def cmd_simulate(args) -> int:
    dgp = DgpSpec.from_dict(_load_json(args.dgp))
    simulate_panel(dgp, args.n, args.seed, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_linear(args) -> int:
    doc = _load_json(args.moments)
    beta = linear_panel_beta([(float(a), float(b)) for a, b in doc["moments"]], tol=args.tol)
    print(f"{beta:.12g}")
    return 0


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_grid(grid, out_prefix: str | None):
    if not out_prefix:
        return
    Path(out_prefix + ".json").write_text(json.dumps(grid.to_json(), indent=2) + "\n")
    Path(out_prefix + ".csv").write_text(grid.hull_csv())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="panelbounds",
        description="Sharp identified sets for short panels with unrestricted unit latents",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="regenerate symbolic tables and diff against goldens")
    p.add_argument("--which", default="all")
    p.add_argument("--out")
    p.add_argument("--write-golden", dest="write_golden")
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("ustar", help="numeric u-compatible sets at a covariate cell")
    for flag in ("--model", "--theta", "--z"):
        p.add_argument(flag, required=True)
    p.add_argument("--y0", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_ustar)

    p = sub.add_parser("cdc", help="numeric core determining collection")
    for flag in ("--model", "--theta", "--z"):
        p.add_argument(flag, required=True)
    p.add_argument("--y0", type=int)
    p.add_argument("--cap", type=int, default=12)
    p.add_argument("--emit-table", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_cdc)

    p = sub.add_parser("check", help="containment inequality check")
    for flag in ("--model", "--theta", "--gu", "--f"):
        p.add_argument(flag, required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int, default=20250)
    p.add_argument("--draws", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("identify", help="identified-set grid scan")
    for flag in ("--model", "--grid", "--f"):
        p.add_argument(flag, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=20250)
    p.add_argument("--draws", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_identify)

    p = sub.add_parser("outer", help="no-latent-law outer set scan")
    for flag in ("--model", "--grid", "--f"):
        p.add_argument(flag, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_outer)

    p = sub.add_parser("profile", help="two-period binary profile bounds")
    for flag in ("--model", "--grid", "--f"):
        p.add_argument(flag, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("simulate", help="draw a balanced panel from a DGP spec")
    p.add_argument("--dgp", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("linear", help="linear panel slope from differenced moments")
    p.add_argument("--moments", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(fn=cmd_linear)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
