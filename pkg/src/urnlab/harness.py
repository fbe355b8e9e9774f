"""Replicated, seeded Monte Carlo experiments against the closed-form limits."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import asymptotics as asy
from .distributions import DiscreteDist
from .errors import UnsupportedError
from .rng import derive_seed
from .urn import ModelKind, simulate_batch


@dataclass
class ExperimentConfig:
    model: ModelKind
    dX: DiscreteDist
    dY: Optional[DiscreteDist]
    W0: int
    B0: int
    m: int
    horizon: int
    checkpoints: list[int]
    replicas: int
    master_seed: int

    def __post_init__(self):
        self.model = ModelKind.parse(self.model)
        self.checkpoints = sorted(set(int(c) for c in self.checkpoints))
        if self.model.uses_y != (self.dY is not None):
            raise ValueError(f"model {self.model.value}: dY "
                             f"{'is required' if self.model.uses_y else 'must be absent'}")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.W0 < 0 or self.B0 < 0 or self.W0 + self.B0 < self.m:
            raise ValueError("W0 + B0 must be at least m (and both non-negative)")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if self.replicas < 2:
            raise ValueError("replicas must be >= 2")
        if any(c < 1 or c > self.horizon for c in self.checkpoints):
            raise ValueError("checkpoints must lie in [1, horizon]")

    @property
    def moments(self) -> asy.ModelMoments:
        return asy.ModelMoments.from_dists(self.m, self.dX, self.dY)


@dataclass
class CheckpointStats:
    n: int
    mean_Z: float
    var_Z: float
    mean_T_over_n: Optional[float]
    mean_W_over_n: Optional[float]
    clt_stat_var: Optional[float] = None
    clt_stat_var_ci: Optional[tuple[float, float]] = None
    ks_normal: Optional[float] = None
    centered_var: Optional[float] = None
    centered_var_ci: Optional[tuple[float, float]] = None
    ks_limit: Optional[float] = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    checkpoints: list[CheckpointStats]
    theory: asy.AsymptoticProfile
    growth_slope: Optional[float] = None
    growth_slope_stderr: Optional[float] = None
    notes: dict = field(default_factory=dict)
    # per-replica counts, shape (checkpoints, replicas); not serialized
    W: np.ndarray = field(default=None, repr=False)
    B: np.ndarray = field(default=None, repr=False)
    steps: list[int] = field(default_factory=list, repr=False)

    def at(self, n: int) -> CheckpointStats:
        for c in self.checkpoints:
            if c.n == n:
                return c
        raise KeyError(n)

    def Z(self, n: int) -> np.ndarray:
        i = self.steps.index(n)
        return self.W[i] / (self.W[i] + self.B[i])

    def to_json(self) -> str:
        cfg = self.config
        body = {
            "config": config_to_json(cfg),
            "theory": self.theory.to_json(),
            "checkpoints": [vars(c) for c in self.checkpoints],
            "growth_slope": self.growth_slope,
            "growth_slope_stderr": self.growth_slope_stderr,
            "notes": self.notes,
        }
        return json.dumps(body, sort_keys=True, indent=2, default=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "mean_Z", "var_Z", "clt_var", "clt_ci_lo", "clt_ci_hi", "ks"])
        for c in self.checkpoints:
            ci = c.clt_stat_var_ci or (None, None)
            ks = c.ks_normal if c.ks_normal is not None else c.ks_limit
            wr.writerow([c.n] + [_fmt(v) for v in (c.mean_Z, c.var_Z, c.clt_stat_var,
                                                    ci[0], ci[1], ks)])
        return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def config_to_json(cfg: ExperimentConfig) -> dict:
    return {
        "model": cfg.model.value,
        "dX": cfg.dX.to_json(),
        "dY": cfg.dY.to_json() if cfg.dY is not None else None,
        "W0": cfg.W0, "B0": cfg.B0, "m": cfg.m,
        "horizon": cfg.horizon,
        "checkpoints": cfg.checkpoints,
        "replicas": cfg.replicas,
        "seed": cfg.master_seed,
    }


# -- statistics -------------------------------------------------------------

def estimate_clt_variance(samples: Sequence[float]) -> tuple[float, tuple[float, float]]:
    """Unbiased variance with a chi-square 95% interval (normal theory)."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n < 30:
        raise ValueError(f"need at least 30 samples, got {n}")
    v = float(np.var(x, ddof=1))
    df = n - 1
    lo = df * v / stats.chi2.ppf(0.975, df)
    hi = df * v / stats.chi2.ppf(0.025, df)
    return v, (float(lo), float(hi))


def ks_distance(samples: Sequence[float], reference_cdf: Callable) -> float:
    """sup |F_n - F| evaluated on both sides of every sample point."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < 10:
        raise ValueError(f"need at least 10 samples, got {n}")
    F = np.asarray(reference_cdf(x), dtype=np.float64)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(min(1.0, max(upper.max(), lower.max(), 0.0)))


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    lx = np.log(np.asarray(ns, dtype=np.float64))
    ly = np.log(np.asarray(values, dtype=np.float64))
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def as_limit_check(z_n: Sequence[float], z_2n: Sequence[float]) -> float:
    """Median over replicas of |Z_2n - Z_n|."""
    return float(np.median(np.abs(np.asarray(z_2n, float) - np.asarray(z_n, float))))


# -- running ----------------------------------------------------------------

def _run_chunk(args):
    model, dX, dY, m, W0, B0, horizon, seeds, cps = args
    _, W, B = simulate_batch(model, dX, dY, m, W0, B0, horizon, seeds, cps)
    return W, B


def simulate_replicas(cfg: ExperimentConfig, workers: int = 1):
    """Per-replica (W, B) at [0] + checkpoints; replica order fixed by index."""
    steps = sorted(set([0] + cfg.checkpoints))
    seeds = [derive_seed(cfg.master_seed, i) for i in range(cfg.replicas)]
    workers = max(1, min(workers, cfg.replicas))
    bounds = np.linspace(0, cfg.replicas, workers + 1).astype(int)
    jobs = [(cfg.model, cfg.dX, cfg.dY, cfg.m, cfg.W0, cfg.B0, cfg.horizon,
             seeds[a:b], steps) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if len(jobs) == 1:
        parts = [_run_chunk(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    W = np.concatenate([p[0] for p in parts], axis=1)
    B = np.concatenate([p[1] for p in parts], axis=1)
    return steps, W, B


def _beta_limit(cfg: ExperimentConfig):
    """Limit law of Z for the classical single-draw Polya urn, if applicable."""
    if cfg.model is ModelKind.XSelf and cfg.m == 1 and len(cfg.dX.atoms) == 1:
        c = cfg.dX.max_value
        return stats.beta(cfg.W0 / c, cfg.B0 / c).cdf
    if (cfg.model is ModelKind.XYSelf and cfg.m == 1 and len(cfg.dX.atoms) == 1
            and cfg.dX == cfg.dY):
        c = cfg.dX.max_value
        return stats.beta(cfg.W0 / c, cfg.B0 / c).cdf
    return None


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    mm = cfg.moments
    theory = asy.profile(cfg.model, mm)
    steps, W, B = simulate_replicas(cfg, workers)
    T = W + B
    Z = W / T
    z_star = theory.stable_zero
    limit_cdf = _beta_limit(cfg)
    notes = {}

    out = []
    for i, n in enumerate(steps):
        c = CheckpointStats(
            n=n,
            mean_Z=float(Z[i].mean()),
            var_Z=float(Z[i].var(ddof=1)),
            mean_T_over_n=float(T[i].mean() / n) if n else None,
            mean_W_over_n=float(W[i].mean() / n) if n else None,
        )
        if n >= 1 and cfg.replicas >= 30 and theory.clt_var_deviation is not None:
            stat = (W[i] - z_star * T[i]) / math.sqrt(n)
            c.clt_stat_var, c.clt_stat_var_ci = estimate_clt_variance(stat)
            c.ks_normal = ks_distance(stat / math.sqrt(theory.clt_var_deviation),
                                      stats.norm.cdf)
            notes["clt_statistic"] = "(W_n - z* T_n)/sqrt(n), z* theoretical"
        if n >= 1 and cfg.replicas >= 30 and cfg.model is ModelKind.XOpp:
            centered = (W[i] - W[i].mean()) / math.sqrt(n)
            c.centered_var, c.centered_var_ci = estimate_clt_variance(centered)
            notes["centered_statistic"] = "(W_n - mean W_n)/sqrt(n), cross-replica mean"
        if n >= 1 and cfg.replicas >= 10 and limit_cdf is not None:
            c.ks_limit = ks_distance(Z[i], limit_cdf)
            notes["limit_law"] = "Beta(W0/C, B0/C) for Z_n"
        out.append(c)

    rep = ExperimentReport(cfg, out, theory, notes=notes, W=W, B=B, steps=steps)
    if theory.growth_exponent is not None:
        try:
            rep.growth_slope, rep.growth_slope_stderr = _growth_from(rep)
        except ValueError:
            pass
    return rep


def _growth_from(rep: ExperimentReport) -> tuple[float, float]:
    cfg = rep.config
    lo = cfg.horizon / 100
    idx = [i for i, n in enumerate(rep.steps) if lo <= n <= cfg.horizon and n > 0]
    if len(idx) < 3:
        raise ValueError("need at least 3 checkpoints in [horizon/100, horizon]")
    ns = [rep.steps[i] for i in idx]
    minority = rep.B if cfg.moments.mu_x > cfg.moments.mu_y else rep.W
    slopes = np.array([loglog_slope(ns, minority[idx, r]) for r in range(cfg.replicas)])
    return float(slopes.mean()), float(slopes.std(ddof=1) / math.sqrt(slopes.size))


def estimate_growth_exponent(cfg: ExperimentConfig, workers: int = 1,
                             report: Optional[ExperimentReport] = None) -> tuple[float, float]:
    """Mean log-log slope of the minority color and its standard error."""
    if cfg.model is not ModelKind.XYSelf:
        raise UnsupportedError("growth exponent is defined for XYSelf only")
    mm = cfg.moments
    if mm.mu_x == mm.mu_y:
        raise UnsupportedError("equal means: exponent undefined")
    rep = report if report is not None else run_experiment(cfg, workers)
    return _growth_from(rep)


def geometric_checkpoints(lo: int, hi: int, count: int) -> list[int]:
    return sorted(set(int(round(v)) for v in np.geomspace(lo, hi, count)))
