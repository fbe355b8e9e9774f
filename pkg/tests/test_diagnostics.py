from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnlab import asymptotics as asy
from urnlab.asymptotics import ModelMoments
from urnlab.diagnostics import (conditional_moments, decompose, increment_numerator,
                                martingale_scale_factors, noise, renlund_conditions)
from urnlab.distributions import CATALOG, DiscreteDist
from urnlab.urn import ModelKind, UrnState, run

ONE = DiscreteDist.point(1)
U13, U12, U35 = CATALOG["uniform13"], CATALOG["uniform12"], CATALOG["uniform35"]

SETUPS = {
    ModelKind.XOpp: (U13, None),
    ModelKind.XSelf: (U12, None),
    ModelKind.XYOpp: (U13, U35),
    ModelKind.XYSelf: (U12, U35),
}


def full_run(model, horizon, seed, m=2, W0=2, B0=2):
    dX, dY = SETUPS[model]
    return run(UrnState(W0, B0), model, dX, dY, m, horizon, seed, record=True)


class TestIncrementNumerator:
    @pytest.mark.parametrize("model", list(ModelKind))
    @given(W=st.integers(1, 40), B=st.integers(1, 40), xi=st.integers(0, 3),
           x=st.integers(1, 5), y=st.integers(1, 5))
    def test_equals_proportion_change(self, model, W, B, xi, x, y):
        m = 3
        if xi > W or m - xi > B:
            return
        y_ = y if model.uses_y else None
        dw, db = model.additions(xi, m, x, y_)
        z = Fraction(W, W + B)
        T1 = W + B + dw + db
        assert increment_numerator(model, z, xi, x, y_, m) == T1 * (Fraction(W + dw, T1) - z)


class TestDecompose:
    @pytest.mark.parametrize("model", list(ModelKind))
    def test_residual_tiny(self, model):
        d = decompose(full_run(model, 10 ** 4, 7), ModelMoments.from_dists(2, *SETUPS[model]))
        assert np.max(np.abs(d.residual)) < 1e-12
        assert len(d.n) == 10 ** 4 and d.n[0] == 1

    def test_gamma_is_inverse_total(self):
        t = full_run(ModelKind.XOpp, 50, 3)
        d = decompose(t, ModelMoments.from_dists(2, U13))
        totals = [s.total for s in t.states()[1:]]
        assert d.gamma.tolist() == [1.0 / T for T in totals]

    def test_xself_drift_zero(self):
        d = decompose(full_run(ModelKind.XSelf, 300, 2), ModelMoments.from_dists(2, U12))
        assert np.all(d.drift_val == 0)

    def test_xopp_unit_noise_values(self):
        mm = ModelMoments.from_dists(1, ONE)
        half = Fraction(1, 2)
        assert {noise(ModelKind.XOpp, half, xi, 1, None, mm)[1] for xi in (0, 1)} == {half, -half}

    def test_paper_variant_breaks_identity(self):
        t = full_run(ModelKind.XYOpp, 500, 4)
        d = decompose(t, ModelMoments.from_dists(2, U13, U35), variant="paper")
        assert np.max(np.abs(d.residual)) > 1e-6

    def test_needs_records(self):
        t = run(UrnState(2, 2), ModelKind.XOpp, U13, None, 2, 10, 1)
        with pytest.raises(ValueError):
            decompose(t, ModelMoments.from_dists(2, U13))

    def test_csv_header(self):
        d = decompose(full_run(ModelKind.XOpp, 3, 1), ModelMoments.from_dists(2, U13))
        lines = d.to_csv().splitlines()
        assert lines[0] == "n,gamma,f,dm,residual" and len(lines) == 4


class TestConditionalMoments:
    def test_xopp_unit_example(self):
        mean, second = conditional_moments(UrnState(2, 2), ModelKind.XOpp, ONE, None, 1)
        assert mean == 0 and second == Fraction(1, 4)

    @pytest.mark.parametrize("model", list(ModelKind))
    @given(W=st.integers(0, 25), B=st.integers(0, 25))
    @settings(max_examples=30, deadline=None)
    def test_mean_exactly_zero(self, model, W, B):
        if W + B < 3:
            return
        dX, dY = SETUPS[model]
        mean, second = conditional_moments(UrnState(W, B), model, dX, dY, 3)
        assert mean == 0 and second >= 0

    def test_xopp_exact_hypergeometric_factor(self):
        # E[dM^2] = nu Var(xi) + sigma^2 c^2 with c = m(1 - 2Z) and the finite-population factor
        W, B, m = 3, 5, 3
        T = W + B
        z = Fraction(W, T)
        var_xi = m * z * (1 - z) * Fraction(T - m, T - 1)
        c = m * (1 - 2 * z)
        _, second = conditional_moments(UrnState(W, B), ModelKind.XOpp, U13, None, m)
        assert second == 5 * var_xi + 1 * c * c

    def test_paper_variant_nonzero_mean(self):
        mean, _ = conditional_moments(UrnState(2, 2), ModelKind.XYOpp, ONE,
                                      DiscreteDist.point(3), 2, variant="paper")
        assert mean != 0

    @pytest.mark.parametrize("model,m", [(ModelKind.XOpp, 2), (ModelKind.XYOpp, 2)])
    def test_second_near_limit_along_path(self, model, m):
        dX, dY = SETUPS[model]
        t = run(UrnState(2, 2), model, dX, dY, m, 10 ** 4, 11)
        _, second = conditional_moments(t.final, model, dX, dY, m)
        limit = asy.noise_var_limit(model, ModelMoments.from_dists(m, dX, dY))
        assert abs(float(second) - limit) / limit < 0.05


class TestRenlund:
    def test_unit_xopp(self):
        t = run(UrnState(1, 1), ModelKind.XOpp, ONE, None, 1, 2000, 1, record=True)
        rep = renlund_conditions(t, ModelMoments.from_dists(1, ONE), ONE)
        assert 2000 / 2002 == pytest.approx(rep.c_u_hat)
        assert rep.c_l_hat == pytest.approx(1 / 3)
        assert rep.k_e_hat == 0
        assert rep.k_f_hat <= 3 * 1 * 1

    def test_random_xopp_bounds(self):
        t = full_run(ModelKind.XOpp, 400, 5)
        rep = renlund_conditions(t, ModelMoments.from_dists(2, U13), U13)
        assert rep.k_f_hat <= 3 * 2 * 2
        assert rep.k_e_hat == 0
        assert 0 < rep.c_l_hat <= rep.c_u_hat < float("inf")
        assert rep.steps == 400

    def test_json(self):
        t = full_run(ModelKind.XYSelf, 20, 5)
        rep = renlund_conditions(t, ModelMoments.from_dists(2, U12, U35), U12, U35)
        assert '"k_e_hat"' in rep.to_json()


class TestScaleFactors:
    def test_polya_example(self):
        t = run(UrnState(1, 1), ModelKind.XSelf, ONE, None, 1, 3, 1, record=True)
        assert martingale_scale_factors(t, 1.0) == pytest.approx([1, 2 / 3, 1 / 2, 2 / 5])

    def test_bad_rate(self):
        t = run(UrnState(1, 1), ModelKind.XSelf, ONE, None, 1, 3, 1, record=True)
        with pytest.raises(ValueError):
            martingale_scale_factors(t, 0)

    def test_scaled_mean_preserved(self):
        # Monte Carlo: E[prod * W_n] = W_0 for XSelf with rate m mu
        m, n = 2, 200
        vals = []
        for seed in range(400):
            t = run(UrnState(2, 3), ModelKind.XSelf, U12, None, m, n, seed, record=True)
            f = martingale_scale_factors(t, m * 1.5)
            vals.append(f[-1] * t.final.white)
        se = np.std(vals) / np.sqrt(len(vals))
        assert abs(np.mean(vals) - 2) < 4 * se
