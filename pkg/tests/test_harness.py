import numpy as np
import pytest
from scipy import stats

from urnlab import asymptotics as asy
from urnlab.distributions import CATALOG, DiscreteDist
from urnlab.errors import UnsupportedError
from urnlab.harness import (ExperimentConfig, as_limit_check, estimate_clt_variance,
                            estimate_growth_exponent, geometric_checkpoints, ks_distance,
                            loglog_slope, run_experiment)
from urnlab.urn import ModelKind

ONE = DiscreteDist.point(1)
U13, U12, U35 = CATALOG["uniform13"], CATALOG["uniform12"], CATALOG["uniform35"]


def cfg(model=ModelKind.XOpp, dX=U13, dY=None, W0=2, B0=2, m=2, horizon=200,
        checkpoints=(100, 200), replicas=200, seed=1):
    return ExperimentConfig(model, dX, dY, W0, B0, m, horizon, list(checkpoints), replicas, seed)


class TestStatistics:
    def test_clt_variance_of_normal(self):
        x = np.random.default_rng(0).normal(0, 2, 20000)
        v, (lo, hi) = estimate_clt_variance(x)
        assert lo < 4 < hi and lo < v < hi
        assert abs(v - 4) < 0.15

    def test_clt_variance_needs_30(self):
        with pytest.raises(ValueError):
            estimate_clt_variance(np.ones(29))

    def test_ks_matches_scipy(self):
        x = np.random.default_rng(1).normal(size=500)
        assert ks_distance(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic)

    def test_ks_uniform_sample_small(self):
        x = np.random.default_rng(2).uniform(size=5000)
        assert ks_distance(x, lambda t: np.clip(t, 0, 1)) < 0.03

    def test_ks_bounds(self):
        assert ks_distance(np.full(20, 5.0), stats.norm.cdf) == pytest.approx(1.0, abs=1e-6)
        with pytest.raises(ValueError):
            ks_distance(np.zeros(9), stats.norm.cdf)

    def test_loglog_slope(self):
        ns = [10, 100, 1000]
        assert loglog_slope(ns, [3 * n for n in ns]) == pytest.approx(1.0)
        assert loglog_slope(ns, [5 * n ** 0.5 for n in ns]) == pytest.approx(0.5)

    def test_as_limit(self):
        assert as_limit_check([0.1, 0.5, 0.9], [0.2, 0.5, 0.6]) == pytest.approx(0.1)

    def test_geometric_checkpoints(self):
        cps = geometric_checkpoints(1000, 100000, 21)
        assert cps[0] == 1000 and cps[-1] == 100000 and cps == sorted(set(cps))


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(model=ModelKind.XYOpp),
        dict(dY=U12),
        dict(m=0),
        dict(W0=1, B0=0),
        dict(horizon=-1, checkpoints=()),
        dict(replicas=1),
        dict(checkpoints=(0,)),
        dict(checkpoints=(300,)),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            cfg(**kw)

    def test_model_by_name(self):
        assert cfg(model="XSelf").model is ModelKind.XSelf


class TestRunExperiment:
    def test_horizon_zero(self):
        rep = run_experiment(cfg(horizon=0, checkpoints=(), replicas=5))
        assert rep.steps == [0]
        c = rep.at(0)
        assert c.mean_Z == 0.5 and c.var_Z == 0 and c.mean_T_over_n is None

    def test_deterministic(self):
        a = run_experiment(cfg())
        b = run_experiment(cfg())
        assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()

    def test_workers_do_not_change_results(self):
        a = run_experiment(cfg(replicas=101), workers=1)
        b = run_experiment(cfg(replicas=101), workers=3)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.B, b.B)
        assert a.to_json() == b.to_json()

    def test_seed_changes_results(self):
        assert run_experiment(cfg(seed=1)).to_json() != run_experiment(cfg(seed=2)).to_json()

    def test_xopp_unit_mean(self):
        rep = run_experiment(cfg(dX=ONE, m=1, horizon=2000, checkpoints=(2000,), replicas=500))
        assert abs(rep.at(2000).mean_Z - 0.5) < 0.01
        assert rep.at(2000).mean_T_over_n == pytest.approx(1.0, abs=0.01)

    def test_clt_variance_xopp_unit(self):
        rep = run_experiment(cfg(dX=ONE, m=1, W0=1, B0=1, horizon=2000, checkpoints=(2000,),
                                 replicas=4000, seed=9))
        lo, hi = rep.at(2000).clt_stat_var_ci
        assert lo < 1 / 12 < hi
        assert rep.at(2000).ks_normal < 0.04

    def test_csv_layout(self):
        lines = run_experiment(cfg()).to_csv().splitlines()
        assert lines[0] == "n,mean_Z,var_Z,clt_var,clt_ci_lo,clt_ci_hi,ks"
        assert [l.split(",")[0] for l in lines[1:]] == ["0", "100", "200"]

    def test_beta_orientation(self):
        # single-draw Polya from (2, 1): Z_inf ~ Beta(2, 1), mean 2/3
        rep = run_experiment(cfg(model=ModelKind.XSelf, dX=ONE, W0=2, B0=1, m=1, horizon=2000,
                                 checkpoints=(2000,), replicas=2000, seed=4))
        z = rep.Z(2000)
        assert abs(z.mean() - 2 / 3) < 0.02
        assert rep.at(2000).ks_limit < 0.05
        assert ks_distance(z, stats.beta(1, 2).cdf) > 0.2

    def test_xyopp_identical_random_laws_follow_their_own_variance(self):
        # independent X and Y with the same law: not the XOpp constant
        rep = run_experiment(cfg(model=ModelKind.XYOpp, dX=U13, dY=U13, horizon=1000,
                                 checkpoints=(1000,), replicas=20000, seed=3), workers=4)
        lo, hi = rep.at(1000).clt_stat_var_ci
        derived = rep.theory.clt_var_deviation
        xopp = asy.profile(ModelKind.XOpp, asy.ModelMoments.from_dists(2, U13)).clt_var_deviation
        assert derived == pytest.approx(11 / 12)
        assert xopp == pytest.approx(10 / 12)
        assert lo < derived < hi
        assert not lo < xopp < hi


class TestGrowth:
    def test_refuses_equal_means(self):
        c = cfg(model=ModelKind.XYSelf, dX=ONE, dY=ONE, m=1)
        with pytest.raises(UnsupportedError):
            estimate_growth_exponent(c)

    def test_refuses_other_models(self):
        with pytest.raises(UnsupportedError):
            estimate_growth_exponent(cfg())

    def test_slope_near_half(self):
        c = cfg(model=ModelKind.XYSelf, dX=DiscreteDist.point(2), dY=ONE, W0=1, B0=1, m=1,
                horizon=20000, checkpoints=geometric_checkpoints(200, 20000, 11), replicas=100)
        slope, se = estimate_growth_exponent(c)
        assert abs(slope - 0.5) < 0.08 and se > 0
        assert run_experiment(c).growth_slope == slope
