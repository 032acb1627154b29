"""Censored outcomes: exact set construction from a record of levels,
censoring indicators, and (possibly endogenous) thresholds.

Uncensored period pairs pin the latent differences to exact equalities;
censored-uncensored pairs contribute one-sided bounds.  The elimination
route and the direct pairwise system coincide, and each simulated record is
compatible with its own set.
"""

from fractions import Fraction

from panelbounds import CovariateCell, ModelSpec, OutcomeSeq, StructuralIndex, Theta
from panelbounds.randomsets import outcome_supportable, ustar_closed_form, ustar_from_index

model = ModelSpec("censored", T=3, y0_status="observed")
theta = Theta(beta=(Fraction(1),), gamma=(Fraction(1, 4),))
cell = CovariateCell.scalar([0, 1, -1])
idx = StructuralIndex.numeric(model, theta, cell)

record = OutcomeSeq(
    (),
    y0=Fraction(1, 2),
    w=(1, 0, 0),
    y1vals=(Fraction(0), Fraction(2), Fraction(1)),
    y3vals=(Fraction(0), Fraction(-1), Fraction(-1)),
)

elim = ustar_from_index(model, idx, record)
direct = ustar_closed_form(model, idx, record)
print("record: censored in period 1, uncensored levels (2, 1) afterwards")
print("\nelimination route:")
for part in elim.region.parts:
    print(part.canonical_text())
print("\ndirect pairwise system:")
for part in direct.region.parts:
    print(part.canonical_text())

u_ok = (0.0, 1.5, 2.0)  # du31 = 2 >= 13/8 and du21 - du31 = -1/2
u_bad = (0.0, 1.0, 0.0)
print(f"\nsupportable at u = {u_ok}:  {outcome_supportable(model, theta, record, u_ok, cell)}")
print(f"supportable at u = {u_bad}: {outcome_supportable(model, theta, record, u_bad, cell)}")
