"""Finite-support integer laws for the addition variables X and Y."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .rng import RngStream


@dataclass(frozen=True)
class MomentSet:
    mean: Fraction
    variance: Fraction
    second_moment: Fraction


@dataclass(frozen=True)
class DiscreteDist:
    """Strictly positive integer law with exact rational probabilities.

    Parameters
    ----------
    atoms : iterable of (value, prob)
        Values must be integers >= 1, probabilities in (0, 1] summing to
        exactly 1.  Atoms are stored sorted by value.
    """

    atoms: tuple[tuple[int, Fraction], ...]
    _cdf: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __init__(self, atoms: Iterable[tuple[int, object]]):
        merged: dict[int, Fraction] = {}
        for value, prob in atoms:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(f"atom value {value!r} is not an integer")
            value = int(value)
            if value < 1:
                raise ValueError(f"atom value {value} must be >= 1")
            if value in merged:
                raise ValueError(f"duplicate atom value {value}")
            p = _to_fraction(prob)
            if not 0 < p <= 1:
                raise ValueError(f"probability {p} of atom {value} outside (0, 1]")
            merged[value] = p
        if not merged:
            raise ValueError("distribution needs at least one atom")
        total = sum(merged.values())
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        ordered = tuple(sorted(merged.items()))
        object.__setattr__(self, "atoms", ordered)

        cum, acc = [], Fraction(0)
        for _, p in ordered:
            acc += p
            cum.append(float(acc))
        cum[-1] = 1.0
        object.__setattr__(self, "_cdf", tuple(cum))

    @classmethod
    def point(cls, value: int) -> "DiscreteDist":
        return cls([(value, 1)])

    @classmethod
    def uniform(cls, values: Iterable[int]) -> "DiscreteDist":
        values = list(values)
        return cls([(v, Fraction(1, len(values))) for v in values])

    @classmethod
    def from_json(cls, obj) -> "DiscreteDist":
        """Parse ``{"atoms": [[value, "p/q" | "0.25"], ...]}``.

        A bare integer is accepted as shorthand for a point mass.
        """
        if isinstance(obj, int) and not isinstance(obj, bool):
            return cls.point(obj)
        if not isinstance(obj, Mapping) or "atoms" not in obj:
            raise ValueError('distribution must be {"atoms": [[value, prob], ...]}')
        try:
            pairs = [(a[0], a[1]) for a in obj["atoms"]]
        except (TypeError, IndexError, KeyError) as exc:
            raise ValueError("each atom must be a [value, prob] pair") from exc
        return cls(pairs)

    def to_json(self) -> dict:
        return {"atoms": [[v, f"{p.numerator}/{p.denominator}"] for v, p in self.atoms]}

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def max_value(self) -> int:
        return self.atoms[-1][0]

    @property
    def min_value(self) -> int:
        return self.atoms[0][0]

    @property
    def cdf(self) -> tuple[float, ...]:
        """Floating-point CDF at each atom, used for inverse-CDF sampling."""
        return self._cdf

    def __str__(self) -> str:
        inner = ", ".join(f"{v}:{p}" for v, p in self.atoms)
        return "{" + inner + "}"


def _to_fraction(prob) -> Fraction:
    if isinstance(prob, Fraction):
        return prob
    if isinstance(prob, bool):
        raise ValueError(f"invalid probability {prob!r}")
    if isinstance(prob, int):
        return Fraction(prob)
    if isinstance(prob, float):
        return Fraction(repr(prob))
    if isinstance(prob, str):
        try:
            return Fraction(prob.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"invalid probability {prob!r}") from exc
    raise ValueError(f"invalid probability {prob!r}")


def moments(d: DiscreteDist) -> MomentSet:
    mean = sum((v * p for v, p in d.atoms), Fraction(0))
    second = sum((v * v * p for v, p in d.atoms), Fraction(0))
    return MomentSet(mean=mean, variance=second - mean * mean, second_moment=second)


def cross_sq_diff(dX: DiscreteDist, dY: DiscreteDist) -> Fraction:
    """E(X - Y)^2 for independent X ~ dX, Y ~ dY."""
    mx, my = moments(dX), moments(dY)
    return mx.second_moment + my.second_moment - 2 * mx.mean * my.mean


def sample(d: DiscreteDist, rng: RngStream) -> int:
    """Inverse-CDF draw; always consumes exactly one uniform."""
    u = rng.uniform()
    return d.atoms[bisect.bisect_right(d.cdf, u)][0]


CATALOG: dict[str, DiscreteDist] = {
    "one": DiscreteDist.point(1),
    "uniform13": DiscreteDist.uniform([1, 3]),
    "uniform12": DiscreteDist.uniform([1, 2]),
    "uniform35": DiscreteDist.uniform([3, 5]),
}
