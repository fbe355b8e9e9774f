"""Multi-drawing two-color urn with random additions: simulation, exact
finite-horizon laws, closed-form limits and Monte Carlo checks."""

__version__ = "0.1.0"

from .distributions import DiscreteDist, cross_sq_diff, moments, sample
from .urn import ModelKind, StepRecord, Trajectory, UrnState, draw_sample, hypergeom_pmf, run, step

__all__ = [
    "DiscreteDist", "moments", "cross_sq_diff", "sample",
    "ModelKind", "UrnState", "StepRecord", "Trajectory",
    "hypergeom_pmf", "draw_sample", "step", "run",
]
