"""Two sanity anchors: the linear panel delivers the classical answer, and
the collection-based check agrees with raw subset enumeration.

Differencing kills the fixed effect in the linear model, so the slope is a
ratio of differenced moments.  For discrete latent laws the containment
inequalities can be checked against every subset of the support directly;
the pruned collection must reach the same verdict.
"""

import random
from fractions import Fraction

from panelbounds import (
    CondOutcomeDist,
    CovariateCell,
    LatentDist,
    ModelSpec,
    Theta,
    artstein_bruteforce,
    check_structure,
    enumerate_outcomes,
    linear_panel_beta,
)

# linear panel: E[dY|z] = beta1 * dz cell by cell
beta1 = 1.5
moments = [(beta1 * dz, dz) for dz in (0.5, 1.0, -2.0, 0.0)]
print(f"linear panel slope from differenced moments: {linear_panel_beta(moments)}")

# brute-force cross-check on a 5-point latent support
rng = random.Random(3)
model = ModelSpec("binary_dynamic", T=2, y0_status="observed")
theta = Theta(beta=(Fraction(1),), gamma=(Fraction(1, 2),))
cells = [CovariateCell.scalar([0, 1], cell_id=0), CovariateCell.scalar([0, -1], cell_id=1)]
points = sorted(round(rng.uniform(-3, 3), 4) for _ in range(5))
weights = [Fraction(1, 5)] * 5
G = LatentDist(
    "discrete_grid", support=tuple((Fraction(str(p)),) for p in points), weights=tuple(weights)
)

outs = enumerate_outcomes(model)
probs = {}
for cid in (0, 1):
    for y0 in (0, 1):
        raw = [rng.random() for _ in outs]
        tot = sum(raw)
        probs[(cid, y0)] = tuple(x / tot for x in raw)
F = CondOutcomeDist(model=model, outcomes=tuple(outs), cells=tuple(cells), probs=probs)

brute, slack = artstein_bruteforce(model, theta, G, F, return_slack=True)
report = check_structure(model, theta, G, F, tol=0.0)
print(f"subset enumeration over 2^5 support sets: feasible={brute} (worst margin {slack:+.4f})")
print(f"pruned collection check:                  feasible={report.passed} (worst margin {report.min_slack:+.4f})")
assert brute == report.passed
