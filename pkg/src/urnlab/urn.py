"""Two-color multi-drawing urn with random additions.

At each step ``m`` balls are drawn without replacement, ``xi`` of them white,
and the urn receives ``Q (xi, m - xi)^T`` new balls where ``Q`` is one of four
replacement regimes:

=========  ===================
XOpp       ``[[0, X], [X, 0]]``
XSelf      ``[[X, 0], [0, X]]``
XYOpp      ``[[0, X], [Y, 0]]``
XYSelf     ``[[X, 0], [0, Y]]``
=========  ===================
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Optional, Sequence

from .distributions import DiscreteDist, sample
from .errors import InsufficientBallsError
from .rng import RngStream


class ModelKind(enum.Enum):
    XOpp = "XOpp"
    XSelf = "XSelf"
    XYOpp = "XYOpp"
    XYSelf = "XYSelf"

    @property
    def uses_y(self) -> bool:
        return self in (ModelKind.XYOpp, ModelKind.XYSelf)

    @property
    def opposite(self) -> bool:
        return self in (ModelKind.XOpp, ModelKind.XYOpp)

    @classmethod
    def parse(cls, name) -> "ModelKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown model {name!r}; valid models: {valid}") from None

    def additions(self, xi: int, m: int, x: int, y: Optional[int]) -> tuple[int, int]:
        """(white added, blue added) for a sample with ``xi`` white balls."""
        if self is ModelKind.XOpp:
            return x * (m - xi), x * xi
        if self is ModelKind.XSelf:
            return x * xi, x * (m - xi)
        if self is ModelKind.XYOpp:
            return x * (m - xi), y * xi
        return x * xi, y * (m - xi)


@dataclass(frozen=True)
class UrnState:
    white: int
    blue: int
    step: int = 0

    @property
    def total(self) -> int:
        return self.white + self.blue

    @property
    def proportion(self) -> Fraction:
        return Fraction(self.white, self.total)


@dataclass(frozen=True)
class StepRecord:
    xi: int
    x_draw: int
    y_draw: Optional[int]
    w_added: int
    b_added: int
    w_before: int
    b_before: int

    @property
    def z_before(self) -> Fraction:
        return Fraction(self.w_before, self.w_before + self.b_before)

    @property
    def z_after(self) -> Fraction:
        w = self.w_before + self.w_added
        return Fraction(w, w + self.b_before + self.b_added)


@dataclass
class Trajectory:
    """A simulated path.

    ``records`` holds one :class:`StepRecord` per step when the run kept full
    records; ``checkpoints`` always holds the states at the requested steps
    (step 0 and the final step are always included).
    """

    initial: UrnState
    m: int
    model: ModelKind
    seed: int
    final: UrnState
    records: list[StepRecord] = field(default_factory=list)
    checkpoints: list[UrnState] = field(default_factory=list)

    @property
    def full(self) -> bool:
        return len(self.records) == self.final.step - self.initial.step

    def states(self) -> list[UrnState]:
        """Every state along a full trajectory, step 0 first."""
        if not self.full:
            raise ValueError("trajectory was run in thin mode; no per-step records")
        out = [self.initial]
        w, b = self.initial.white, self.initial.blue
        for k, r in enumerate(self.records, start=self.initial.step + 1):
            w += r.w_added
            b += r.b_added
            out.append(UrnState(w, b, k))
        return out

    def to_csv(self, full: bool = False) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        if not full:
            wr.writerow(["n", "W", "B", "T", "Z"])
            for s in self.checkpoints:
                wr.writerow([s.step, s.white, s.blue, s.total, repr(s.white / s.total)])
            return buf.getvalue()
        wr.writerow(["n", "W", "B", "T", "Z", "xi", "x", "y", "w_added", "b_added"])
        states = self.states()
        s0 = states[0]
        wr.writerow([s0.step, s0.white, s0.blue, s0.total, repr(s0.white / s0.total),
                     "", "", "", "", ""])
        for s, r in zip(states[1:], self.records):
            wr.writerow([s.step, s.white, s.blue, s.total, repr(s.white / s.total),
                         r.xi, r.x_draw, "" if r.y_draw is None else r.y_draw,
                         r.w_added, r.b_added])
        return buf.getvalue()


def hypergeom_pmf(W: int, B: int, m: int, k: int) -> Fraction:
    """P[xi = k] when drawing ``m`` balls from ``W`` white and ``B`` blue."""
    if W < 0 or B < 0 or m < 0:
        raise ValueError("W, B and m must be non-negative")
    if m > W + B:
        raise InsufficientBallsError(f"cannot draw {m} balls from an urn of {W + B}")
    if not 0 <= k <= m:
        raise ValueError(f"k={k} outside [0, {m}]")
    if k > W or m - k > B:
        return Fraction(0)
    return Fraction(comb(W, k) * comb(B, m - k), comb(W + B, m))


def draw_sample(state: UrnState, m: int, rng: RngStream) -> int:
    """Number of white balls among ``m`` sequential picks without replacement."""
    total = state.total
    if total < m:
        raise InsufficientBallsError(f"cannot draw {m} balls from an urn of {total}")
    white_left = state.white
    xi = 0
    for j in range(m):
        # white iff floor(u * remaining) < white_left
        if rng.uniform() * float(total - j) < float(white_left):
            xi += 1
            white_left -= 1
    return xi


def _check_dists(model: ModelKind, dY: Optional[DiscreteDist]) -> None:
    if model.uses_y and dY is None:
        raise ValueError(f"model {model.value} needs a Y distribution")
    if not model.uses_y and dY is not None:
        raise ValueError(f"model {model.value} uses X only; got a Y distribution")


def step(state: UrnState, model: ModelKind, dX: DiscreteDist, dY: Optional[DiscreteDist],
         m: int, rng: RngStream) -> tuple[UrnState, StepRecord]:
    _check_dists(model, dY)
    xi = draw_sample(state, m, rng)
    x = sample(dX, rng)
    y = sample(dY, rng) if model.uses_y else None
    dw, db = model.additions(xi, m, x, y)
    rec = StepRecord(xi, x, y, dw, db, state.white, state.blue)
    return UrnState(state.white + dw, state.blue + db, state.step + 1), rec


def run(initial: UrnState, model: ModelKind, dX: DiscreteDist, dY: Optional[DiscreteDist],
        m: int, horizon: int, seed: int, *, record: bool = False,
        checkpoints: Optional[Iterable[int]] = None) -> Trajectory:
    """Apply :func:`step` ``horizon`` times from a stream seeded by ``seed``.

    Checkpoints are step counts relative to ``initial``.  Full per-step
    records are kept only with ``record=True``.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    model = ModelKind.parse(model)
    _check_dists(model, dY)
    if initial.total < m:
        raise InsufficientBallsError(f"cannot draw {m} balls from an urn of {initial.total}")
    wanted = set(checkpoints or ()) | {0, horizon}
    rng = RngStream(seed)
    state = initial
    records: list[StepRecord] = []
    saved = [initial]
    for k in range(1, horizon + 1):
        state, rec = step(state, model, dX, dY, m, rng)
        if record:
            records.append(rec)
        if k in wanted and k != 0:
            saved.append(state)
    return Trajectory(initial=initial, m=m, model=model, seed=seed, final=state,
                      records=records, checkpoints=saved)


def simulate_batch(model: ModelKind, dX: DiscreteDist, dY: Optional[DiscreteDist], m: int,
                   W0: int, B0: int, horizon: int, seeds: Sequence[int],
                   checkpoints: Sequence[int]):
    """Evolve one urn per seed in lockstep; return (W, B) at each checkpoint.

    Replica ``r`` consumes exactly the stream ``RngStream(seeds[r])`` in the
    same order as :func:`run`, so results agree draw for draw with the
    scalar path.  Returns two int64 arrays of shape (len(checkpoints), R).
    """
    import numpy as np

    from .rng import BatchStream

    model = ModelKind.parse(model)
    _check_dists(model, dY)
    if W0 + B0 < m:
        raise InsufficientBallsError(f"cannot draw {m} balls from an urn of {W0 + B0}")
    top = max(dX.max_value, dY.max_value if dY else 0)
    if W0 + B0 + horizon * m * top >= 2 ** 52:
        raise OverflowError("urn totals would exceed exact float range; use run()")
    cps = sorted(set(checkpoints))
    if cps and (cps[0] < 0 or cps[-1] > horizon):
        raise ValueError("checkpoints must lie in [0, horizon]")

    R = len(seeds)
    rng = BatchStream(seeds)
    W = np.full(R, W0, dtype=np.int64)
    B = np.full(R, B0, dtype=np.int64)
    outW = np.empty((len(cps), R), dtype=np.int64)
    outB = np.empty_like(outW)
    xcdf = np.asarray(dX.cdf)
    xval = np.asarray(dX.values, dtype=np.int64)
    if dY is not None:
        ycdf = np.asarray(dY.cdf)
        yval = np.asarray(dY.values, dtype=np.int64)

    def draw(cdf, val):
        u = rng.uniform()
        if len(val) == 1:
            return val[0]
        return val[np.searchsorted(cdf, u, side="right")]

    ci = 0
    while ci < len(cps) and cps[ci] == 0:
        outW[ci], outB[ci] = W, B
        ci += 1
    for k in range(1, horizon + 1):
        T = (W + B).astype(np.float64)
        left = W.astype(np.float64)
        xi = np.zeros(R, dtype=np.int64)
        for j in range(m):
            white = rng.uniform() * (T - j) < left
            xi += white
            left -= white
        x = draw(xcdf, xval)
        if model is ModelKind.XOpp:
            W += x * (m - xi)
            B += x * xi
        elif model is ModelKind.XSelf:
            W += x * xi
            B += x * (m - xi)
        elif model is ModelKind.XYOpp:
            y = draw(ycdf, yval)
            W += x * (m - xi)
            B += y * xi
        else:
            y = draw(ycdf, yval)
            W += x * xi
            B += y * (m - xi)
        while ci < len(cps) and cps[ci] == k:
            outW[ci], outB[ci] = W, B
            ci += 1
    return cps, outW, outB
