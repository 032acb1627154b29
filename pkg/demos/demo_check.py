"""Simulate a panel whose fixed effect misbehaves on purpose, then check
candidate structures against the containment inequalities.

The fixed effect loads on the covariates AND on the time-varying latents,
and the initial condition loads on the fixed effect.  None of that hurts the
true parameter: the inequalities are valid for arbitrary unit-latent
covariation.  A distorted parameter, by contrast, fails visibly.
"""

from fractions import Fraction

from panelbounds import (
    CovariateCell,
    DgpSpec,
    LatentDist,
    ModelSpec,
    Theta,
    check_structure,
    estimate_F,
    simulate_panel,
)

model = ModelSpec("binary_dynamic", T=2, y0_status="observed")
truth = Theta(beta=(Fraction(1),), gamma=(Fraction(1, 2),))
G = LatentDist("gaussian_iid", (1.0,))
cells = (
    (CovariateCell.scalar([0, 0], cell_id=0), 0.4),
    (CovariateCell.scalar([0, 1], cell_id=1), 0.3),
    (CovariateCell.scalar([0, -1], cell_id=2), 0.3),
)
dgp = DgpSpec(
    model,
    truth,
    G,
    cells,
    v_dist={
        "c": {"base": 0.2, "z_coef": 0.6, "u_coef": 0.8, "sd": 1.0, "mix_shift": 2.0, "mix_prob": 0.3},
        "y0": {"base": 0.1, "c_coef": 1.2},
    },
)

path = "/tmp/panelbounds_demo_panel.csv"
simulate_panel(dgp, n_units=60_000, seed=7, path=path)
F = estimate_F(path, model, min_units=50)
print(f"panel written to {path}; cells x initial conditions: {sorted(F.probs)}")

rep = check_structure(model, truth, G, F, tol=0.02)
print(f"\ntruth:     pass={rep.passed}  worst slack={rep.min_slack:+.4f}")

distorted = Theta(beta=(Fraction(-2),), gamma=(Fraction(-3, 2),))
rep_bad = check_structure(model, distorted, G, F, tol=0.02)
print(f"distorted: pass={rep_bad.passed}  worst slack={rep_bad.min_slack:+.4f}")

worst = min(rep_bad.items, key=lambda it: it.slack)
print(
    f"binding inequality: item {worst.item_id} at cell {worst.cell_id}, y0={worst.y0}: "
    f"P = {worst.lhs:.3f} > G = {worst.rhs:.3f}"
)
