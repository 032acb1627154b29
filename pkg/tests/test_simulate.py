import math
from fractions import Fraction

import numpy as np
import pytest

from panelbounds.distributions import LatentDist, estimate_F
from panelbounds.models import (
    CovariateCell,
    ModelSpec,
    OutcomeSeq,
    StructuralIndex,
    Theta,
    enumerate_outcomes,
    structural_residual,
)
from panelbounds.simulate import (
    DgpSpec,
    _draw_unit_latents,
    _roll_forward,
    exact_F,
    exact_F_2p_binary_orthant,
    simulate_panel,
)

G1 = LatentDist("gaussian_iid", (1.0,))


def _binary_dgp(v_dist=None, theta=None, cells=None, model=None):
    model = model or ModelSpec("binary_dynamic", T=2, y0_status="observed")
    theta = theta or Theta(beta=(Fraction(1),), gamma=(Fraction(1, 2),))
    cells = cells or (
        (CovariateCell.scalar([0, 0], cell_id=0), 0.5),
        (CovariateCell.scalar([0, 1], cell_id=1), 0.5),
    )
    return DgpSpec(model, theta, G1, cells, v_dist=v_dist or {})


class TestCorners:
    def test_sunk_index_gives_all_zeros(self):
        dgp = _binary_dgp(v_dist={"c": {"base": -1e6, "sd": 0.0}})
        F = exact_F(dgp, n_draws=2000, seed_base=1)
        for key, vec in F.probs.items():
            assert vec[0] == pytest.approx(1.0)

    def test_tobit_corner(self):
        model = ModelSpec("censored", T=2, y0_status="absent")
        theta = Theta(beta=(Fraction(0),))
        dgp = DgpSpec(
            model,
            theta,
            G1,
            ((CovariateCell.scalar([0, 0]), 1.0),),
            v_dist={"c": {"base": -1e6, "sd": 0.0}, "y3": {"base": 0.0, "sd": 0.0}},
        )
        F = exact_F(dgp, n_draws=1000, seed_base=1)
        all_censored = OutcomeSeq((), w=(1, 1))
        idx = list(F.outcomes).index(all_censored)
        assert F.probs[(0, None)][idx] == pytest.approx(1.0)

    def test_fair_coins(self):
        model = ModelSpec("binary_static", T=2)
        dgp = DgpSpec(
            model,
            Theta(beta=(Fraction(0),)),
            G1,
            ((CovariateCell.scalar([0, 0]), 1.0),),
            v_dist={"c": {"base": 0.0, "sd": 0.0}},
        )
        F = exact_F(dgp, n_draws=400_000, seed_base=3)
        for p in F.probs[(0, None)]:
            assert p == pytest.approx(0.25, abs=3 * math.sqrt(0.25 * 0.75 / 400_000))

    def test_probabilities_sum_to_one(self):
        dgp = _binary_dgp(v_dist={"c": {"u_coef": 0.5}})
        F = exact_F(dgp, n_draws=5000, seed_base=2)
        for vec in F.probs.values():
            assert sum(vec) == pytest.approx(1.0, abs=1e-12)


class TestPanelVsExact:
    def test_frequencies_within_three_binomial_ses(self, tmp_path):
        dgp = _binary_dgp(
            v_dist={"c": {"base": 0.1, "z_coef": 0.4, "u_coef": 0.6, "sd": 1.0}, "y0": {"base": 0.2, "c_coef": 0.5}}
        )
        n_units = 100_000
        path = str(tmp_path / "panel.csv")
        simulate_panel(dgp, n_units, seed=13, path=path)
        F_hat = estimate_F(path, dgp.model, min_units=1)
        F_pop = exact_F(dgp, n_draws=1_000_000, seed_base=5)
        checked = 0
        for key, vec in F_pop.probs.items():
            n = F_hat.n_units.get(key)
            if not n or n < 500:
                continue
            for p_hat, p in zip(F_hat.vector(*key), vec):
                se = math.sqrt(max(p * (1 - p), 1e-9) / n) + 3e-3  # + MC error in p
                assert abs(p_hat - p) <= 3.5 * se
                checked += 1
        assert checked >= 16

    def test_panel_deterministic(self, tmp_path):
        dgp = _binary_dgp()
        p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        simulate_panel(dgp, 500, seed=21, path=p1)
        simulate_panel(dgp, 500, seed=21, path=p2)
        assert open(p1).read() == open(p2).read()


class TestOrthantOracle:
    def test_matches_monte_carlo(self):
        dgp = _binary_dgp(
            v_dist={"c": {"base": 0.2, "z_coef": 0.5, "sd": 1.0}, "y0": {"base": 0.3}}
        )
        F = exact_F(dgp, n_draws=2_000_000, seed_base=11)
        orth = exact_F_2p_binary_orthant(dgp)
        for key, want in orth.items():
            got = F.probs[key]
            n = F.n_units[key]
            for a, b in zip(got, want):
                se = math.sqrt(max(b * (1 - b), 1e-9) / n)
                assert abs(a - b) <= 4 * se

    def test_rejects_dependent_fixed_effect(self):
        dgp = _binary_dgp(v_dist={"c": {"u_coef": 1.0}})
        with pytest.raises(ValueError, match="independent"):
            exact_F_2p_binary_orthant(dgp)


class TestStructuralConsistency:
    @pytest.mark.parametrize(
        "model,theta",
        [
            (ModelSpec("binary_dynamic", T=3, y0_status="unobserved"), Theta(beta=(Fraction(1),), gamma=(Fraction(-1, 2),))),
            (ModelSpec("ordered", T=2, n_choices=3), Theta(beta=(Fraction(1),), cuts=(Fraction(-1), Fraction(1)))),
            (ModelSpec("multidiscrete", T=2, n_choices=3), Theta(beta=((Fraction(1),), (Fraction(-1),)))),
            (
                ModelSpec("simultaneous_binary", T=2),
                Theta(alpha=(Fraction(1), Fraction(1, 2)), beta=((Fraction(1),), (Fraction(-1),))),
            ),
            (ModelSpec("censored", T=2, y0_status="observed"), Theta(beta=(Fraction(1),), gamma=(Fraction(1, 4),))),
        ],
    )
    def test_every_simulated_record_is_consistent(self, model, theta):
        cells = ((CovariateCell.scalar([0, 1] + [0] * (model.T - 2), cell_id=0), 1.0),)
        dgp = DgpSpec(
            model,
            theta,
            G1,
            cells,
            v_dist={"c": {"base": 0.1, "u_coef": 0.3, "sd": 0.8}, "y0": {"base": 0.2, "c_coef": 0.4}, "y3": {"sd": 0.5}},
        )
        cell = cells[0][0]
        rng = np.random.default_rng(5)
        n = 300
        u, c, v2, y0, y3 = _draw_unit_latents(dgp, cell, n, rng)
        rolled, y0_out = _roll_forward(dgp, cell, u, c, v2, y0, y3)
        idx = StructuralIndex.numeric(model, theta, cell)
        for i in range(n):
            if model.family == "censored":
                y1m, wm = rolled
                out = OutcomeSeq(
                    (),
                    y0=float(y0_out[i]),
                    w=tuple(int(x) for x in wm[i]),
                    y1vals=tuple(float(x) for x in y1m[i]),
                    y3vals=tuple(float(x) for x in y3[i]),
                )
                v = (float(c[i]),)
                uu = u[i, 0, :]
            elif model.family in ("multidiscrete", "simultaneous_binary"):
                out = OutcomeSeq(tuple(int(x) for x in rolled[i]))
                v = (float(c[i]), float(v2[i]) if v2 is not None else 0.0)
                uu = u[i]
            else:
                out = OutcomeSeq(
                    tuple(int(x) for x in rolled[i]),
                    y0=int(y0_out[i]) if y0_out is not None else None,
                )
                v = (float(c[i]),) if out.y0 is not None else (float(c[i]), int(y0[i]) if y0 is not None else 0)
                uu = u[i, 0, :]
            assert structural_residual(model, idx, out, u=uu, v=v) == pytest.approx(0.0, abs=1e-9)


class TestVRobustness:
    def test_truth_passes_regardless_of_unit_latent_dependence(self):
        from panelbounds.identify import check_structure

        model = ModelSpec("binary_dynamic", T=3, y0_status="unobserved")
        theta = Theta(beta=(Fraction(1),), gamma=(Fraction(3, 4),))
        cells = (
            (CovariateCell.scalar([0, 0, 0], cell_id=0), 0.5),
            (CovariateCell.scalar([0, 1, Fraction(-1, 2)], cell_id=1), 0.5),
        )
        for v_dist in (
            {"c": {"base": 0.0, "sd": 1.0}},
            {
                "c": {"base": 0.5, "z_coef": 1.5, "u_coef": 2.0, "sd": 0.5, "mix_shift": 3.0, "mix_prob": 0.4},
                "y0": {"base": -1.0, "c_coef": 2.0, "z_coef": 1.0},
            },
        ):
            dgp = DgpSpec(model, theta, G1, cells, v_dist=v_dist)
            F = exact_F(dgp, n_draws=300_000, seed_base=17)
            rep = check_structure(model, theta, G1, F)
            assert rep.passed, v_dist


class TestPanelRoundTripOtherFamilies:
    @pytest.mark.parametrize(
        "model,theta",
        [
            (ModelSpec("simultaneous_binary", T=2), Theta(alpha=(Fraction(1, 2), Fraction(1, 4)), beta=((Fraction(1),), (Fraction(-1, 2),)))),
            (ModelSpec("ordered", T=2, n_choices=3), Theta(beta=(Fraction(1),), cuts=(Fraction(-1), Fraction(1)))),
            (ModelSpec("ordered", T=2, n_choices=3, y0_status="observed"), Theta(beta=(Fraction(1),), gamma=(Fraction(1, 2),), cuts=(Fraction(-1), Fraction(1)))),
            (ModelSpec("multidiscrete", T=2, n_choices=3), Theta(beta=((Fraction(1),), (Fraction(-1),)))),
        ],
    )
    def test_estimated_frequencies_match_population(self, tmp_path, model, theta):
        cells = (
            (CovariateCell.scalar([0, 1], cell_id=0), 0.5),
            (CovariateCell.scalar([0, -1], cell_id=1), 0.5),
        )
        dgp = DgpSpec(
            model, theta, G1, cells,
            v_dist={"c": {"u_coef": 0.3, "sd": 1.0}, "v2": {"sd": 0.8}, "y0": {"base": 0.2}},
        )
        path = str(tmp_path / "panel.csv")
        simulate_panel(dgp, 40_000, seed=9, path=path)
        F_hat = estimate_F(path, model, min_units=1)
        F_pop = exact_F(dgp, n_draws=400_000, seed_base=6)
        checked = 0
        for key, vec in F_pop.probs.items():
            n = F_hat.n_units.get(key)
            if not n or n < 400:
                continue
            for p_hat, p in zip(F_hat.vector(*key), vec):
                se = math.sqrt(max(p * (1 - p), 1e-9) / n) + 2e-3
                assert abs(p_hat - p) <= 3.5 * se
                checked += 1
        assert checked >= 8
