"""Closed-form limits for the four replacement regimes.

Functions take exact rational moments and return floats wherever a square
root enters (the XYOpp limit proportion); elsewhere rational inputs give
rational outputs so they can be compared exactly in the oracle.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Union

from .distributions import DiscreteDist, cross_sq_diff, moments
from .errors import UnsupportedError
from .urn import ModelKind

RANDOM_LIMIT = "random-limit"

Number = Union[Fraction, float]


@dataclass(frozen=True)
class ModelMoments:
    m: int
    mu_x: Fraction
    var_x: Fraction
    nu_x: Fraction
    mu_y: Optional[Fraction] = None
    var_y: Optional[Fraction] = None
    nu_y: Optional[Fraction] = None
    e_sq_diff: Optional[Fraction] = None

    @classmethod
    def from_dists(cls, m: int, dX: DiscreteDist, dY: Optional[DiscreteDist] = None):
        mx = moments(dX)
        if dY is None:
            return cls(m, mx.mean, mx.variance, mx.second_moment)
        my = moments(dY)
        return cls(m, mx.mean, mx.variance, mx.second_moment,
                   my.mean, my.variance, my.second_moment, cross_sq_diff(dX, dY))

    def _need_y(self, model: ModelKind) -> None:
        if self.mu_y is None:
            raise ValueError(f"model {model.value} needs Y moments")


@dataclass(frozen=True)
class AsymptoticProfile:
    """Limit objects of one model.

    ``clt_var_proportion`` is the limiting variance of ``sqrt(n)(Z_n - z*)``;
    ``clt_var_deviation`` that of ``(W_n - z* T_n)/sqrt(n)``;
    ``clt_var_centered`` that of ``(W_n - E W_n)/sqrt(n)`` as printed for
    XOpp, with the value derived from the recursion alongside.
    """

    model: str
    stable_zero: Union[float, str]
    total_rate: float
    gamma_hat: Optional[float]
    noise_var: Optional[float]
    clt_var_proportion: Optional[float]
    clt_var_deviation: Optional[float]
    clt_var_centered: Optional[float]
    clt_var_centered_derived: Optional[float]
    paper_G_over_3: Optional[float]
    growth_exponent: Optional[float]

    def to_json(self) -> dict:
        return asdict(self)


def drift(model: ModelKind, x: Number, mm: ModelMoments) -> Number:
    """Mean increment numerator f(x) of the proportion recursion."""
    m = mm.m
    if model is ModelKind.XOpp:
        return mm.mu_x * m * (1 - 2 * x)
    if model is ModelKind.XSelf:
        return 0 * x
    mm._need_y(model)
    if model is ModelKind.XYOpp:
        return m * (mm.mu_x - mm.mu_y) * x * x - 2 * mm.mu_x * m * x + mm.mu_x * m
    return m * (mm.mu_x - mm.mu_y) * x * (1 - x)


def drift_prime(model: ModelKind, x: Number, mm: ModelMoments) -> Number:
    m = mm.m
    if model is ModelKind.XOpp:
        return -2 * mm.mu_x * m
    if model is ModelKind.XSelf:
        return 0 * x
    mm._need_y(model)
    if model is ModelKind.XYOpp:
        return 2 * m * (mm.mu_x - mm.mu_y) * x - 2 * mm.mu_x * m
    return m * (mm.mu_x - mm.mu_y) * (1 - 2 * x)


def stable_zero(model: ModelKind, mm: ModelMoments) -> Union[Fraction, float, str]:
    if model is ModelKind.XOpp:
        return Fraction(1, 2)
    if model is ModelKind.XSelf:
        return RANDOM_LIMIT
    mm._need_y(model)
    if model is ModelKind.XYOpp:
        if mm.mu_x == mm.mu_y:
            return Fraction(1, 2)
        sx, sy = math.sqrt(mm.mu_x), math.sqrt(mm.mu_y)
        return sx / (sx + sy)
    if mm.mu_x > mm.mu_y:
        return Fraction(1)
    if mm.mu_x < mm.mu_y:
        return Fraction(0)
    return RANDOM_LIMIT


def _point_zero(model: ModelKind, mm: ModelMoments):
    z = stable_zero(model, mm)
    if z == RANDOM_LIMIT:
        raise UnsupportedError(f"{model.value} has a random limit here; no point zero")
    return z


def total_rate(model: ModelKind, mm: ModelMoments) -> float:
    """Almost-sure limit of T_n / n."""
    m = mm.m
    if model in (ModelKind.XOpp, ModelKind.XSelf):
        return float(m * mm.mu_x)
    mm._need_y(model)
    if model is ModelKind.XYOpp:
        return m * math.sqrt(mm.mu_x * mm.mu_y)
    return float(m * max(mm.mu_x, mm.mu_y))


def gamma_hat(model: ModelKind, mm: ModelMoments) -> float:
    z = _point_zero(model, mm)
    return float(-drift_prime(model, z, mm)) / total_rate(model, mm)


def xi_second_moment(z: Number, m: int, T=None) -> Number:
    """E[xi^2] for a hypergeometric draw at proportion z (T=None: T -> inf)."""
    var = m * z * (1 - z)
    if T is not None:
        var = var * Fraction(T - m, T - 1)
    return var + m * m * z * z


def noise_var_limit(model: ModelKind, mm: ModelMoments) -> float:
    """lim E[dM^2 | F_n] at the point zero, for T -> infinity."""
    z = _point_zero(model, mm)
    m = mm.m
    if model is ModelKind.XOpp:
        return float(m * mm.nu_x / 4)
    if model is ModelKind.XYOpp:
        z = float(z)
        nx, c = float(mm.nu_x), float(mm.nu_x - mm.mu_x * mm.mu_y)
        e = float(mm.e_sq_diff)
        a2 = z * z * e - 2 * z * c + nx          # E[(z(X-Y) - X)^2]
        return (a2 * xi_second_moment(z, m)
                + 2 * m * m * z * (1 - z) * (z * c - nx)
                + m * m * nx * (1 - z) ** 2)
    # XYSelf with unequal means: the sample is monochrome in the limit.
    return 0.0


def paper_G(x: float, mm: ModelMoments) -> float:
    """The printed fourth-degree polynomial for the XYOpp CLT, coefficient for coefficient."""
    if mm.mu_y is None:
        raise ValueError("paper_G needs XYOpp moments")
    m = mm.m
    nu, e, mxy = mm.nu_x, mm.e_sq_diff, mm.mu_x * mm.mu_y
    a = [
        m * m * nu,
        m * (1 - 2 * m) * nu,
        3 * m * (m - 1) * nu - 2 * m * (m - 1) * mxy,
        m * e - 2 * (m * m - m) * (nu - mxy),
        m * (m - 1) * e,
    ]
    return float(sum(float(c) * x ** i for i, c in enumerate(a)))


def clt_variance(model: ModelKind, mm: ModelMoments, statistic: str = "proportion-scaled") -> float:
    """Limiting variance of a root-n statistic.

    ``proportion-scaled`` is ``(W_n - z* T_n)/sqrt(n)``; ``mean-centered`` is
    ``(W_n - E W_n)/sqrt(n)``, XOpp only, in its printed form
    ``(m nu + m^2 sigma^2)/12``.
    """
    if statistic == "mean-centered":
        if model is not ModelKind.XOpp:
            raise UnsupportedError("mean-centered statistic is defined for XOpp only")
        m = mm.m
        return float((m * mm.nu_x + m * m * mm.var_x) / 12)
    if statistic != "proportion-scaled":
        raise UnsupportedError(f"unknown statistic {statistic!r}")
    g = gamma_hat(model, mm)
    v = noise_var_limit(model, mm)
    if g <= 0.5 or v <= 0:
        raise UnsupportedError(f"{model.value}: CLT conditions fail (gamma_hat={g}, noise={v})")
    return v / (2 * g - 1)


def centered_variance_derived(mm: ModelMoments) -> float:
    """Slope of Var(W_n)/n for XOpp obtained from the exact recursion.

    ``W_n - T_n/2`` contracts at rate 2/n and is asymptotically uncorrelated
    with ``T_n``, so the fluctuation of ``T_n/2`` adds ``m^2 sigma^2 / 4``.
    """
    m = mm.m
    return float(m * mm.nu_x / 12 + m * m * mm.var_x / 4)


def growth_exponent(mm: ModelMoments) -> float:
    """Exponent of the minority color in XYSelf."""
    mm._need_y(ModelKind.XYSelf)
    if mm.mu_x == mm.mu_y:
        raise UnsupportedError("equal means: both colors grow linearly, no exponent")
    return float(min(mm.mu_x, mm.mu_y) / max(mm.mu_x, mm.mu_y))


def profile(model: ModelKind, mm: ModelMoments) -> AsymptoticProfile:
    model = ModelKind.parse(model)
    z = stable_zero(model, mm)
    rate = total_rate(model, mm)
    g = v = pv = dv = cv = cvd = pg = rho = None
    if z != RANDOM_LIMIT:
        g = gamma_hat(model, mm)
        v = noise_var_limit(model, mm)
        if g > 0.5 and v > 0:
            dv = clt_variance(model, mm)
            pv = v / rate ** 2 / (2 * g - 1)
        z = float(z)
    if model is ModelKind.XOpp:
        cv = clt_variance(model, mm, "mean-centered")
        cvd = centered_variance_derived(mm)
    if model is ModelKind.XYOpp:
        pg = paper_G(z, mm) / 3
    if model is ModelKind.XYSelf and mm.mu_x != mm.mu_y:
        rho = growth_exponent(mm)
    return AsymptoticProfile(model.value, z, rate, g, v, pv, dv, cv, cvd, pg, rho)
