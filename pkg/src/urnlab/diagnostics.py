"""Stochastic-approximation view of a trajectory.

The white proportion obeys ``Z_{n+1} - Z_n = gamma_{n+1} (f(Z_n) + dM_{n+1})``
with ``gamma_{n+1} = 1 / T_{n+1}``.  The increment numerator ``D`` is exact
for each model, so the decomposition holds pathwise up to rounding.

``variant="paper"`` swaps in the printed noise terms for XOpp and XYOpp.
Those do not decompose the path and their conditional means do not vanish;
they exist only to exhibit that.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .asymptotics import ModelMoments, drift
from .distributions import DiscreteDist
from .urn import ModelKind, Trajectory, UrnState, hypergeom_pmf

VARIANTS = ("exact", "paper")


def increment_numerator(model: ModelKind, z, xi: int, x: int, y: Optional[int], m: int):
    """D with Z_{n+1} - Z_n = D / T_{n+1}."""
    if model is ModelKind.XOpp:
        return x * (m - xi - m * z)
    if model is ModelKind.XSelf:
        return x * xi - z * m * x
    if model is ModelKind.XYOpp:
        return xi * (z * (x - y) - x) + m * x * (1 - z)
    return xi * (z * (y - x) + x) - m * z * y


def _paper_drift(model, z, mm):
    if model is ModelKind.XYOpp:
        m = mm.m
        return m * (mm.mu_y - mm.mu_x) * z * z - 2 * mm.mu_x * m * z + mm.mu_x * m
    return drift(model, z, mm)


def noise(model: ModelKind, z, xi, x, y, mm: ModelMoments, variant: str = "exact"):
    """(drift value, dM) at one step."""
    m = mm.m
    if variant == "exact":
        f = drift(model, z, mm)
        return f, increment_numerator(model, z, xi, x, y, m) - f
    if variant != "paper":
        raise ValueError(f"unknown variant {variant!r}")
    if model is ModelKind.XOpp:
        return drift(model, z, mm), x * (m - xi - m * z) - mm.mu_x * m * (1 - z)
    if model is ModelKind.XYOpp:
        d = xi * (z * (x - y) - x) + m * x
        return _paper_drift(model, z, mm), d - _paper_drift(model, z, mm)
    return noise(model, z, xi, x, y, mm, "exact")


@dataclass
class SaDecomposition:
    n: np.ndarray
    gamma: np.ndarray
    drift_val: np.ndarray
    delta_m: np.ndarray
    residual: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "gamma", "f", "dm", "residual"])
        for row in zip(self.n, self.gamma, self.drift_val, self.delta_m, self.residual):
            wr.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])
        return buf.getvalue()


@dataclass
class RenlundReport:
    c_l_hat: float
    c_u_hat: float
    c_l_hat_pre: float
    c_u_hat_pre: float
    k_u_hat: float
    k_f_hat: float
    k_e_hat: float
    steps: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def _need_records(traj: Trajectory) -> None:
    if not traj.full or not traj.records:
        raise ValueError("decomposition needs a trajectory run with full records")


def decompose(traj: Trajectory, mm: ModelMoments, variant: str = "exact") -> SaDecomposition:
    _need_records(traj)
    model = traj.model
    N = len(traj.records)
    gam, fv, dm, res = (np.empty(N) for _ in range(4))
    for k, r in enumerate(traj.records):
        z0 = r.w_before / (r.w_before + r.b_before)
        w1 = r.w_before + r.w_added
        t1 = w1 + r.b_before + r.b_added
        f, d = noise(model, z0, r.xi, r.x_draw, r.y_draw, mm, variant)
        f, d = float(f), float(d)
        gam[k] = 1.0 / t1
        fv[k] = f
        dm[k] = d
        # exact rational difference, rounded once
        dz = float(Fraction(w1, t1) - Fraction(r.w_before, r.w_before + r.b_before))
        res[k] = dz - gam[k] * (f + d)
    n = np.arange(traj.initial.step + 1, traj.initial.step + N + 1)
    return SaDecomposition(n, gam, fv, dm, res)


def conditional_moments(state: UrnState, model: ModelKind, dX: DiscreteDist,
                        dY: Optional[DiscreteDist], m: int,
                        variant: str = "exact") -> tuple[Fraction, Fraction]:
    """Exact E[dM | state] and E[dM^2 | state] by full enumeration."""
    model = ModelKind.parse(model)
    mm = ModelMoments.from_dists(m, dX, dY)
    W, B = state.white, state.blue
    z = Fraction(W, W + B)
    ys = dY.atoms if model.uses_y else ((None, Fraction(1)),)
    mean = second = Fraction(0)
    for xi in range(m + 1):
        p = hypergeom_pmf(W, B, m, xi)
        if not p:
            continue
        for x, px in dX.atoms:
            for y, py in ys:
                _, d = noise(model, z, xi, x, y, mm, variant)
                w = p * px * py
                mean += w * d
                second += w * d * d
    return mean, second


def renlund_conditions(traj: Trajectory, mm: ModelMoments, dX: DiscreteDist,
                       dY: Optional[DiscreteDist] = None) -> RenlundReport:
    """Empirical constants for the step-size, noise, drift and bias conditions.

    ``c_*_hat`` use gamma_n = 1/T_n (n counted from the start of the path);
    ``c_*_hat_pre`` use the pre-addition step size n/T_{n-1}.  The noise
    bound is the relaxed conditional second moment.
    """
    _need_records(traj)
    states = traj.states()
    model = traj.model
    n0 = traj.initial.step
    post = [(s.step - n0) / s.total for s in states[1:]]
    pre = [(s.step - n0) / p.total for p, s in zip(states, states[1:])]
    k_u = k_f = k_e = 0.0
    for s in states[:-1]:
        mean, second = conditional_moments(s, model, dX, dY, traj.m)
        k_u = max(k_u, float(second))
        k_e = max(k_e, abs(float(mean)) / s.total)
        k_f = max(k_f, abs(float(drift(model, s.proportion, mm))))
    return RenlundReport(min(post), max(post), min(pre), max(pre), k_u, k_f, k_e,
                         len(traj.records))


def martingale_scale_factors(traj: Trajectory, rate: float) -> list[float]:
    """prod_{k<n} T_k / (T_k + rate) for n = 0 .. N (entry 0 is the empty product).

    Multiplying by W_n (rate m mu_X) or B_n (rate m mu_Y) gives a martingale
    in the self-reinforcing models.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    states = traj.states()
    out = [1.0]
    acc = 1.0
    for s in states[:-1]:
        acc *= s.total / (s.total + rate)
        out.append(acc)
    return out
