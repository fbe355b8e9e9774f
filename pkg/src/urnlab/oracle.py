"""Exact finite-horizon law of the urn by forward dynamic programming."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .asymptotics import ModelMoments
from .diagnostics import noise
from .distributions import DiscreteDist
from .errors import InsufficientBallsError, StateBudgetExceeded
from .urn import ModelKind, hypergeom_pmf

DEFAULT_BUDGET = 10 ** 6


@dataclass
class StateDist:
    horizon: int
    mass: dict[tuple[int, int], Fraction]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["W", "B", "prob_num", "prob_den"])
        for (w, b), p in sorted(self.mass.items()):
            wr.writerow([w, b, p.numerator, p.denominator])
        return buf.getvalue()


def _transitions(W, B, model, dX, dY, m):
    ys = dY.atoms if model.uses_y else ((None, Fraction(1)),)
    for xi in range(m + 1):
        p = hypergeom_pmf(W, B, m, xi)
        if not p:
            continue
        for x, px in dX.atoms:
            for y, py in ys:
                yield xi, x, y, p * px * py


def _advance(dist, model, dX, dY, m):
    nxt: dict = defaultdict(Fraction)
    for (W, B), pr in dist.items():
        for xi, x, y, p in _transitions(W, B, model, dX, dY, m):
            dw, db = model.additions(xi, m, x, y)
            nxt[(W + dw, B + db)] += pr * p
    return dict(nxt)


def _validate(W0, B0, m, model, dY):
    if W0 < 0 or B0 < 0:
        raise ValueError("initial counts must be non-negative")
    if W0 + B0 < m:
        raise InsufficientBallsError(f"cannot draw {m} balls from an urn of {W0 + B0}")
    if model.uses_y != (dY is not None):
        raise ValueError(f"model {model.value}: Y distribution {'missing' if model.uses_y else 'not used'}")


def exact_distribution(W0: int, B0: int, m: int, model: ModelKind, dX: DiscreteDist,
                       dY: Optional[DiscreteDist], n: int,
                       budget: int = DEFAULT_BUDGET) -> StateDist:
    model = ModelKind.parse(model)
    _validate(W0, B0, m, model, dY)
    dist = {(W0, B0): Fraction(1)}
    for k in range(1, n + 1):
        dist = _advance(dist, model, dX, dY, m)
        if len(dist) > budget:
            raise StateBudgetExceeded(len(dist), budget, k)
    return StateDist(n, dist)


def exact_moments(sd: StateDist) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(E W, Var W, E Z, Var Z) with Z = W / (W + B)."""
    ew = ew2 = ez = ez2 = Fraction(0)
    for (w, b), p in sd.mass.items():
        z = Fraction(w, w + b)
        ew += p * w
        ew2 += p * w * w
        ez += p * z
        ez2 += p * z * z
    return ew, ew2 - ew * ew, ez, ez2 - ez * ez


def _scaled_defects(W, B, model, dX, dY, m, mm):
    """E[c W' | state] - W and the same for B, where c = T/(T + m mu)."""
    T = W + B
    ew = eb = Fraction(0)
    for xi, x, y, p in _transitions(W, B, model, dX, dY, m):
        dw, db = model.additions(xi, m, x, y)
        ew += p * (W + dw)
        eb += p * (B + db)
    mu_w = mm.mu_x
    mu_b = mm.mu_x if model is ModelKind.XSelf else mm.mu_y
    return (ew * Fraction(T) / (T + m * mu_w) - W,
            eb * Fraction(T) / (T + m * mu_b) - B)


def check_martingale(W0: int, B0: int, m: int, model: ModelKind, dX: DiscreteDist,
                     dY: Optional[DiscreteDist], n: int, budget: int = DEFAULT_BUDGET,
                     variant: str = "exact") -> Fraction:
    """Largest |conditional-mean defect| over every state reachable before step n.

    The defect is E[dM | state] for the proportion recursion and, for the
    self-reinforcing models, also the one-step defect of the scaled counts
    prod T_k/(T_k + m mu) * W_n (and B_n).  A correct model gives exactly 0.
    """
    model = ModelKind.parse(model)
    _validate(W0, B0, m, model, dY)
    mm = ModelMoments.from_dists(m, dX, dY)
    worst = Fraction(0)
    dist = {(W0, B0): Fraction(1)}
    for k in range(n):
        for (W, B) in dist:
            z = Fraction(W, W + B)
            mean = Fraction(0)
            for xi, x, y, p in _transitions(W, B, model, dX, dY, m):
                mean += p * noise(model, z, xi, x, y, mm, variant)[1]
            worst = max(worst, abs(mean))
            if model in (ModelKind.XSelf, ModelKind.XYSelf):
                for d in _scaled_defects(W, B, model, dX, dY, m, mm):
                    worst = max(worst, abs(d))
        if k + 1 < n:
            dist = _advance(dist, model, dX, dY, m)
            if len(dist) > budget:
                raise StateBudgetExceeded(len(dist), budget, k + 1)
    return worst
