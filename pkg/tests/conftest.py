import random
from fractions import Fraction

import pytest

from panelbounds.models import CovariateCell, ModelSpec, Theta
from panelbounds.polyhedra import LinExpr


def rational(rng: random.Random, lo=-2, hi=2, den=8) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def scalar_cell(rng: random.Random, model: ModelSpec, cell_id=0, with_y2=False) -> CovariateCell:
    z = tuple((rational(rng),) for _ in range(model.T))
    y2 = tuple(rng.randint(0, 1) for _ in range(model.T)) if with_y2 else None
    return CovariateCell(z, cell_id=cell_id, y2=y2)


def random_theta(rng: random.Random, model: ModelSpec) -> Theta:
    if model.family in ("multidiscrete", "simultaneous_binary"):
        beta = ((rational(rng),), (rational(rng),))
        alpha = (abs(rational(rng)), abs(rational(rng))) if model.family == "simultaneous_binary" else ()
        return Theta(alpha=alpha, beta=beta)
    gamma = (rational(rng),) if model.family in ("binary_dynamic",) or model.y0_status != "absent" else ()
    cuts = ()
    if model.family == "ordered":
        lo = rational(rng, -2, 0)
        cuts = (lo, lo + abs(rational(rng)) + Fraction(1, 16))
    return Theta(beta=(rational(rng),), gamma=gamma, cuts=cuts)


def coord(name: str) -> LinExpr:
    return LinExpr.coord(name)


@pytest.fixture
def rng():
    return random.Random(20240817)
