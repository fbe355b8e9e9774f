"""Bundled acceptance suite.

Each criterion returns a :class:`Verdict` with the measured value, the
target and the tolerance it was judged against.  Criteria are grouped so a
subset can be run with ``only=``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import stats

from . import asymptotics as asy
from .diagnostics import conditional_moments, decompose
from .distributions import CATALOG, DiscreteDist
from .harness import (ExperimentConfig, as_limit_check, geometric_checkpoints, ks_distance,
                      run_experiment, simulate_replicas)
from .oracle import check_martingale, exact_distribution
from .urn import ModelKind, UrnState, run

SEED = 20261016

U13 = CATALOG["uniform13"]
U12 = CATALOG["uniform12"]
U35 = CATALOG["uniform35"]
ONE = CATALOG["one"]


@dataclass
class Verdict:
    number: int
    name: str
    group: str
    passed: bool
    measured: str
    target: str
    tolerance: str
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        s = (f"[{flag}] {self.number:>2} {self.name}: measured {self.measured}; "
             f"target {self.target}; tolerance {self.tolerance}")
        return s + (f" ({self.detail})" if self.detail else "")


def _g(x) -> str:
    return f"{float(x):.6g}"


# -- shared experiments ------------------------------------------------------

def thm1_config(seed: int = SEED) -> ExperimentConfig:
    return ExperimentConfig(ModelKind.XOpp, U13, None, 2, 2, 2, 10_000, [10_000], 5000, seed)


def thm3_config(seed: int = SEED) -> ExperimentConfig:
    return ExperimentConfig(ModelKind.XYOpp, ONE, U35, 2, 2, 2, 10_000, [10_000], 5000, seed)


@lru_cache(maxsize=None)
def _experiment(which: str, workers: int):
    cfg = {"thm1": thm1_config, "thm3": thm3_config}[which]()
    return run_experiment(cfg, workers)


# -- criteria ----------------------------------------------------------------

def c01_oracle_vs_simulation(workers=1, variant="exact") -> Verdict:
    n, reps = 6, 200_000
    sd = exact_distribution(2, 2, 2, ModelKind.XOpp, U13, None, n)
    cfg = ExperimentConfig(ModelKind.XOpp, U13, None, 2, 2, 2, n, [n], reps, SEED + 1)
    _, W, B = simulate_replicas(cfg, workers)
    keys, counts = np.unique(np.stack([W[-1], B[-1]], axis=1), axis=0, return_counts=True)
    emp = {(int(w), int(b)): c / reps for (w, b), c in zip(keys, counts)}
    support = set(emp) | set(sd.mass)
    tv = 0.5 * sum(abs(emp.get(k, 0.0) - float(sd.mass.get(k, 0))) for k in support)
    off = set(emp) - set(sd.mass)
    return Verdict(1, "oracle vs simulation (XOpp, n=6)", "exact", tv < 0.01 and not off,
                   _g(tv), "0", "TV < 0.01",
                   f"{len(sd.mass)} exact states, {len(off)} unreachable states simulated")


def c02_martingale_exactness(workers=1, variant="exact") -> Verdict:
    defects = {}
    for model in ModelKind:
        dY = DiscreteDist.point(3) if model.uses_y else None
        defects[model.value] = check_martingale(2, 2, 2, model, ONE, dY, 3, variant=variant)
    printed = {}
    for model in (ModelKind.XOpp, ModelKind.XYOpp):
        dY = DiscreteDist.point(3) if model.uses_y else None
        printed[model.value] = check_martingale(2, 2, 2, model, ONE, dY, 3, variant="paper")
    ok = all(d == 0 for d in defects.values()) and all(d != 0 for d in printed.values())
    meas = ", ".join(f"{k}={v}" for k, v in defects.items())
    det = "printed-variant defects: " + ", ".join(f"{k}={v}" for k, v in printed.items())
    return Verdict(2, "martingale exactness (W0=B0=2, m=2, X=1, Y=3, n=3)", "exact", ok,
                   meas, "0 for all models; printed variants nonzero", "exact", det)


def c03_thm1_limit(workers=1, variant="exact") -> Verdict:
    rep = _experiment("thm1", workers)
    c = rep.at(10_000)
    mm = rep.config.moments
    vz = float(mm.nu_x / (12 * mm.mu_x ** 2 * mm.m)) / 10_000
    ok = abs(c.mean_Z - 0.5) < 0.005 and c.var_Z < 2 * vz
    return Verdict(3, "XOpp Z_n -> 1/2", "thm1", ok,
                   f"mean Z {_g(c.mean_Z)}, var Z {_g(c.var_Z)}",
                   f"0.5; theory var {_g(vz)}", "|dev| < 0.005; var < 2x theory")


def c04_thm1_clt(workers=1, variant="exact") -> Verdict:
    rep = _experiment("thm1", workers)
    c = rep.at(10_000)
    target = clt_target = rep.theory.clt_var_deviation
    rel = abs(c.clt_stat_var - target) / target
    lo, hi = c.clt_stat_var_ci
    ok = rel < 0.10 and lo <= clt_target <= hi and c.ks_normal < 0.05
    return Verdict(4, "XOpp (W_n - T_n/2)/sqrt(n) variance", "thm1", ok,
                   f"var {_g(c.clt_stat_var)} CI [{_g(lo)}, {_g(hi)}], KS {_g(c.ks_normal)}",
                   f"m nu/12 = {_g(target)}", "rel < 10%, CI covers, KS < 0.05")


def c05_thm1_centered(workers=1, variant="exact") -> Verdict:
    rep = _experiment("thm1", workers)
    n = 10_000
    mm = rep.config.moments
    W = rep.W[rep.steps.index(n)].astype(np.float64)
    slope = float(np.var(W, ddof=1)) / n
    target = asy.clt_variance(ModelKind.XOpp, mm, "mean-centered")
    derived = asy.centered_variance_derived(mm)
    rel = abs(slope - target) / target
    return Verdict(5, "XOpp Var(W_n)/n", "thm1", rel < 0.15,
                   _g(slope), f"(m nu + m^2 sigma^2)/12 = {_g(target)}", "rel < 15%",
                   f"rel gap {rel:.3f}; recursion-derived m nu/12 + m^2 sigma^2/4 = "
                   f"{_g(derived)}, rel gap {abs(slope - derived) / derived:.3f}")


def c06_thm3(workers=1, variant="exact") -> Verdict:
    cfg = thm3_config()
    mm = cfg.moments
    th = asy.profile(cfg.model, mm)
    z = th.stable_zero
    # plug-in check of the noise limit against exact enumeration at a large state
    T = 3 * 10 ** 6
    W = round(z * T)
    _, second = conditional_moments(UrnState(W, T - W), cfg.model, cfg.dX, cfg.dY, cfg.m)
    plug_gap = abs(float(second) - th.noise_var) / th.noise_var
    rep = _experiment("thm3", workers)
    c = rep.at(10_000)
    target = th.clt_var_deviation
    rel = abs(c.clt_stat_var - target) / target
    rate_gap = abs(c.mean_T_over_n - th.total_rate) / th.total_rate
    ok = (plug_gap < 0.01 and abs(c.mean_Z - z) < 0.01 and rate_gap < 0.02 and rel < 0.10)
    return Verdict(6, "XYOpp limit, growth and CLT (X=1, Y~U{3,5}, m=2)", "thm3", ok,
                   f"mean Z {_g(c.mean_Z)}, T/n {_g(c.mean_T_over_n)}, "
                   f"var {_g(c.clt_stat_var)}",
                   f"z {_g(z)}, rate {_g(th.total_rate)}, V/3 {_g(target)}",
                   "|dZ| < 0.01, rate 2%, var 10%, plug-in 1%",
                   f"plug-in gap {plug_gap:.2e}; printed G(z)/3 = {_g(th.paper_G_over_3)}")


REDUCTION_FIELDS = ("stable_zero", "total_rate", "gamma_hat", "noise_var",
                    "clt_var_proportion", "clt_var_deviation", "growth_exponent")


def c07_reduction(workers=1, variant="exact") -> Verdict:
    m = 2
    bad = []
    for name in ("one", "uniform13", "uniform12"):
        d = CATALOG[name]
        a = asy.profile(ModelKind.XOpp, asy.ModelMoments.from_dists(m, d))
        b = asy.profile(ModelKind.XYOpp, asy.ModelMoments.from_dists(m, d, d))
        for f in REDUCTION_FIELDS:
            va, vb = getattr(a, f), getattr(b, f)
            if va is None and vb is None:
                continue
            if va is None or vb is None or abs(va - vb) > 1e-12:
                bad.append(f"{name}.{f}: XOpp {_g(va) if va is not None else None} "
                           f"vs XYOpp {_g(vb) if vb is not None else None}")
    return Verdict(7, "XYOpp with dY = dX equals XOpp profile", "thm3", not bad,
                   f"{len(bad)} mismatching fields", "0", "1e-12 per field",
                   "; ".join(bad))


def c08_thm2(workers=1, variant="exact") -> Verdict:
    cfg = ExperimentConfig(ModelKind.XSelf, ONE, None, 1, 1, 1, 5000, [2000, 4000, 5000],
                           2000, SEED + 8)
    rep = run_experiment(cfg, workers)
    ks = ks_distance(rep.Z(5000), stats.uniform.cdf)
    med = as_limit_check(rep.Z(2000), rep.Z(4000))
    cfg2 = ExperimentConfig(ModelKind.XSelf, U12, None, 1, 1, 1, 4000, [2000, 4000],
                            2000, SEED + 9)
    rep2 = run_experiment(cfg2, workers)
    med2 = as_limit_check(rep2.Z(2000), rep2.Z(4000))
    ok = ks < 0.05 and med < 0.02 and med2 < 0.03
    return Verdict(8, "XSelf random limit (Polya Beta law, a.s. convergence)", "thm2", ok,
                   f"KS {_g(ks)}, median|dZ| {_g(med)}, random-X median {_g(med2)}",
                   "Uniform(0,1) limit", "KS < 0.05, 0.02, 0.03")


def c09_thm4_growth(workers=1, variant="exact") -> Verdict:
    horizon = 100_000
    cps = geometric_checkpoints(1000, horizon, 21)
    cfg = ExperimentConfig(ModelKind.XYSelf, DiscreteDist.point(2), ONE, 1, 1, 1, horizon,
                           cps, 200, SEED + 10)
    rep = run_experiment(cfg, workers)
    c = rep.at(horizon)
    slope, se = rep.growth_slope, rep.growth_slope_stderr
    ok = (abs(slope - 0.5) < 0.05 and abs(c.mean_T_over_n - 2) / 2 < 0.02
          and abs(c.mean_W_over_n - 2) / 2 < 0.02)
    return Verdict(9, "XYSelf minority growth exponent (X=2, Y=1)", "thm4", ok,
                   f"slope {_g(slope)} (se {_g(se)}), T/n {_g(c.mean_T_over_n)}, "
                   f"W/n {_g(c.mean_W_over_n)}", "rho 0.5, rate 2", "+-0.05, 2%")


def c10_thm4_equal(workers=1, variant="exact") -> Verdict:
    cfg = ExperimentConfig(ModelKind.XYSelf, ONE, ONE, 1, 1, 1, 4000, [2000, 4000],
                           10_000, SEED + 11)
    rep = run_experiment(cfg, workers)
    med = as_limit_check(rep.Z(2000), rep.Z(4000))
    mean = rep.at(4000).mean_Z
    ok = med < 0.02 and abs(mean - 0.5) < 0.01
    return Verdict(10, "XYSelf equal means: martingale proportion", "thm4", ok,
                   f"median|dZ| {_g(med)}, mean Z {_g(mean)}", "W0/T0 = 0.5",
                   "median < 0.02, |mean - 0.5| < 0.01")


def c11_sa_exactness(workers=1, variant="exact") -> Verdict:
    worst = 0.0
    per = []
    for model in ModelKind:
        dX = U13
        dY = (U35 if model is ModelKind.XYOpp else U12) if model.uses_y else None
        traj = run(UrnState(2, 2), model, dX, dY, 2, 10_000, SEED + 12, record=True)
        dec = decompose(traj, asy.ModelMoments.from_dists(2, dX, dY), variant)
        r = float(np.max(np.abs(dec.residual)))
        per.append(f"{model.value} {r:.1e}")
        worst = max(worst, r)
    gh = []
    for dX, dY in ((U13, U13), (ONE, U35), (U12, DiscreteDist.point(4)), (U35, ONE)):
        for m in (1, 3):
            gh.append(asy.gamma_hat(ModelKind.XOpp, asy.ModelMoments.from_dists(m, dX)))
            gh.append(asy.gamma_hat(ModelKind.XYOpp, asy.ModelMoments.from_dists(m, dX, dY)))
    gdev = max(abs(g - 2.0) for g in gh)
    ok = worst < 1e-12 and gdev <= 1e-12
    return Verdict(11, "SA decomposition residual and gamma_hat", "sa", ok,
                   f"max residual {worst:.2e}, max |gamma_hat - 2| {gdev:.1e}",
                   "0; 2", "1e-12", ", ".join(per))


def c12_determinism(workers=1, variant="exact") -> Verdict:
    a = _experiment("thm1", workers).to_json()
    b = run_experiment(thm1_config(), workers).to_json()
    return Verdict(12, "determinism of the XOpp CLT experiment", "determinism", a == b,
                   "identical" if a == b else "differs", "byte-identical report", "exact")


CRITERIA: list[Callable[..., Verdict]] = [
    c01_oracle_vs_simulation, c02_martingale_exactness, c03_thm1_limit, c04_thm1_clt,
    c05_thm1_centered, c06_thm3, c07_reduction, c08_thm2, c09_thm4_growth,
    c10_thm4_equal, c11_sa_exactness, c12_determinism,
]

GROUPS = {
    "exact": (1, 2), "thm1": (3, 4, 5), "thm3": (6, 7), "thm2": (8,),
    "thm4": (9, 10), "sa": (11,), "determinism": (12,),
}


def selected(only: Optional[str]) -> list[Callable[..., Verdict]]:
    if not only:
        return list(CRITERIA)
    nums: set[int] = set()
    for tok in only.split(","):
        tok = tok.strip()
        if tok in GROUPS:
            nums.update(GROUPS[tok])
        elif tok.isdigit() and 1 <= int(tok) <= len(CRITERIA):
            nums.add(int(tok))
        else:
            raise ValueError(f"unknown criterion {tok!r}; groups: {', '.join(GROUPS)}")
    return [CRITERIA[i - 1] for i in sorted(nums)]


def run_suite(only: Optional[str] = None, workers: int = 1, variant: str = "exact",
              echo: Optional[Callable[[str], None]] = None) -> list[Verdict]:
    out = []
    for crit in selected(only):
        v = crit(workers=workers, variant=variant)
        if echo is not None:
            echo(v.line())
        out.append(v)
    return out
