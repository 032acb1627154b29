import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from panelbounds.distributions import (
    CondOutcomeDist,
    LatentDist,
    PanelFormatError,
    estimate_F,
    measure,
    prob_Y_in,
)
from panelbounds.models import CovariateCell, ModelSpec, OutcomeSeq, Theta, enumerate_outcomes
from panelbounds.polyhedra import LinExpr, RegionUnion, full_space, ge, le, system

du21, du31 = LinExpr.coord("du21"), LinExpr.coord("du31")
G1 = LatentDist("gaussian_iid", (1.0,))
M2 = ModelSpec("binary_static", T=2)
M3 = ModelSpec("binary_static", T=3)


class TestMeasure:
    def test_full_space(self):
        res = measure(G1, full_space(("du21",)), model=M2)
        assert res.estimate == 1.0 and res.exact

    def test_halfline_symmetry(self):
        res = measure(G1, system(("du21",), [le(du21, 0)]), model=M2)
        assert res.exact and res.estimate == pytest.approx(0.5, abs=1e-12)

    def test_one_dim_interval(self):
        # du ~ N(0, 2): P[0 <= du <= 1] from the normal distribution function
        res = measure(G1, system(("du21",), [ge(du21, 0), le(du21, 1)]), model=M2)
        want = norm.cdf(1 / math.sqrt(2)) - 0.5
        assert res.exact and res.estimate == pytest.approx(want, abs=1e-12)

    def test_two_dim_against_quadrature_oracle(self):
        # region {d21 >= 0, d32 <= -1}; (d21, d31) have cov [[2,1],[1,2]];
        # oracle integrates the conditional normal over the half-plane
        region = system(("du21", "du31"), [ge(du21, 0), le(du31 - du21, -1)])

        def integrand(x):
            mean = 0.5 * x
            sd = math.sqrt(1.5)
            return norm.pdf(x, scale=math.sqrt(2)) * norm.cdf((x - 1 - mean) / sd)

        oracle, err = integrate.quad(integrand, 0, 40)
        res = measure(G1, region, model=M3, n_draws=400_000)
        assert not res.exact
        assert abs(res.estimate - oracle) < 4 * res.std_error + err

    def test_determinism_across_calls(self):
        region = system(("du21", "du31"), [ge(du21, 0), le(du31, 1)])
        a = measure(G1, region, cell_id=3, model=M3, seed_base=99)
        b = measure(G1, region, cell_id=3, model=M3, seed_base=99)
        assert a.estimate == b.estimate

    def test_monotone_in_region(self):
        small = system(("du21", "du31"), [ge(du21, 1), le(du31, 0)])
        big = system(("du21", "du31"), [ge(du21, 0)])
        ms = measure(G1, small, model=M3)
        mb = measure(G1, big, model=M3)
        assert ms.estimate <= mb.estimate + 3 * (ms.std_error + mb.std_error)

    def test_complement_sums_to_one(self):
        from panelbounds.polyhedra import region_complement

        region = RegionUnion((system(("du21", "du31"), [ge(du21, 0), le(du31, 1)]),))
        comp = RegionUnion(tuple(region_complement(region)))
        a = measure(G1, region, model=M3)
        b = measure(G1, comp, model=M3)
        assert a.estimate + b.estimate == pytest.approx(1.0, abs=3 * (a.std_error + b.std_error) + 1e-12)

    def test_discrete_grid_exact(self):
        G = LatentDist(
            "discrete_grid",
            support=((Fraction(-1),), (Fraction(0),), (Fraction(2),)),
            weights=(Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)),
        )
        res = measure(G, system(("du21",), [ge(du21, 0)]), model=M2)
        assert res.exact and res.estimate == 0.75

    def test_ar1_variance(self):
        G = LatentDist("gaussian_corr", (1.0, 0.5))
        res = measure(G, system(("du21",), [le(du21, 0)]), model=M2)
        assert res.estimate == pytest.approx(0.5, abs=1e-12)
        res2 = measure(G, system(("du21",), [le(du21, 1)]), model=M2)
        # Var(du) = 2 sigma^2 (1 - rho) = 1
        assert res2.estimate == pytest.approx(norm.cdf(1.0), abs=1e-12)

    def test_piecewise_uniform(self):
        G = LatentDist("piecewise_uniform", nodes=(-1.0, 0.0, 2.0), weights=(0.5, 0.5))
        res = measure(G, system(("du21",), [le(du21, 1)]), model=M2)
        assert res.exact and res.estimate == pytest.approx(0.75)

    def test_unknown_coordinate_rejected(self):
        bad = system(("qq",), [ge(LinExpr.coord("qq"), 0)])
        with pytest.raises((KeyError, ValueError)):
            measure(G1, RegionUnion((bad, system(("qq",), [le(LinExpr.coord("qq"), 0)]))), model=M3, n_draws=10)


class TestCondOutcomeDist:
    def _tiny(self):
        cells = (CovariateCell.scalar([0, 1], cell_id=0),)
        return CondOutcomeDist(
            model=M2,
            outcomes=tuple(enumerate_outcomes(M2)),
            cells=cells,
            probs={(0, None): (0.1, 0.2, 0.3, 0.4)},
        )

    def test_prob_all_and_none(self):
        F = self._tiny()
        outs = enumerate_outcomes(M2)
        assert prob_Y_in(F, 0, outs) == pytest.approx(1.0)
        assert prob_Y_in(F, 0, []) == 0.0

    def test_prob_direct_sum(self):
        F = self._tiny()
        sel = [OutcomeSeq((0, 1)), OutcomeSeq((1, 0))]
        assert prob_Y_in(F, 0, sel) == pytest.approx(0.5)

    def test_unknown_cell(self):
        with pytest.raises(KeyError):
            self._tiny().vector(5)

    def test_vector_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum"):
            CondOutcomeDist(
                model=M2,
                outcomes=tuple(enumerate_outcomes(M2)),
                cells=(CovariateCell.scalar([0, 1]),),
                probs={(0, None): (0.1, 0.2, 0.3, 0.3)},
            )


class TestEstimateF:
    def _write(self, tmp_path, rows, header="unit,period,y,z1"):
        p = tmp_path / "panel.csv"
        p.write_text(header + "\n" + "\n".join(rows) + "\n")
        return str(p)

    def test_two_unit_frequencies(self, tmp_path):
        path = self._write(
            tmp_path,
            ["a,1,0,0", "a,2,1,1", "b,1,1,0", "b,2,0,1"],
        )
        F = estimate_F(path, M2, min_units=1)
        assert F.vector(0, None) == pytest.approx((0.0, 0.5, 0.5, 0.0))

    def test_missing_period_names_unit(self, tmp_path):
        path = self._write(tmp_path, ["a,1,0,0", "a,2,1,1", "b,1,1,0"])
        with pytest.raises(PanelFormatError, match="unit b"):
            estimate_F(path, M2)

    def test_duplicate_period_rejected(self, tmp_path):
        path = self._write(tmp_path, ["a,1,0,0", "a,1,1,0"])
        with pytest.raises(PanelFormatError, match="duplicate"):
            estimate_F(path, M2)

    def test_bad_outcome_code(self, tmp_path):
        path = self._write(tmp_path, ["a,1,7,0", "a,2,0,1"])
        with pytest.raises(PanelFormatError, match="outside the family range"):
            estimate_F(path, M2)

    def test_small_cells_flagged(self, tmp_path):
        path = self._write(tmp_path, ["a,1,0,0", "a,2,1,1"])
        F = estimate_F(path, M2, min_units=30)
        assert F.flagged_cells == ((0, None),)

    def test_y0_split(self, tmp_path):
        model = ModelSpec("binary_dynamic", T=2, y0_status="observed")
        rows = [
            "a,1,0,0,1",
            "a,2,1,1,1",
            "b,1,1,0,0",
            "b,2,0,1,0",
            "c,1,1,0,1",
            "c,2,1,1,1",
        ]
        path = self._write(tmp_path, rows, header="unit,period,y,z1,y0")
        F = estimate_F(path, model, min_units=1)
        assert set(F.y0_values) == {0, 1}
        assert F.vector(0, 1) == pytest.approx((0.0, 0.5, 0.0, 0.5))
        assert F.vector(0, 0) == pytest.approx((0.0, 0.0, 1.0, 0.0))


class TestCensoredPanel:
    def test_censored_panel_round_trip(self, tmp_path):
        from fractions import Fraction as Fr

        from panelbounds.simulate import DgpSpec, simulate_panel

        model = ModelSpec("censored", T=2, y0_status="observed")
        theta = Theta(beta=(Fr(1),), gamma=(Fr(1, 4),))
        dgp = DgpSpec(
            model,
            theta,
            LatentDist("gaussian_iid", (1.0,)),
            ((CovariateCell.scalar([0, 1], cell_id=0), 1.0),),
            v_dist={"c": {"sd": 1.0}, "y0": {"base": 0.1}, "y3": {"sd": 0.5}},
        )
        path = str(tmp_path / "cens.csv")
        simulate_panel(dgp, 400, 3, path)
        F = estimate_F(path, model, min_units=1)
        # continuous initial levels are data, not conditioning cells
        assert sorted(F.probs.keys()) == [(0, None)]
        assert sum(F.probs[(0, None)]) == pytest.approx(1.0)
