"""Scalar belief summaries: expected level and normalized entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .mapmodel import N_LEVELS

_DIST_TOL = 1e-9
_MAX_ENTROPY = math.log(N_LEVELS)


def _check_distribution(p: Sequence[float]) -> list[float]:
    vals = [float(x) for x in p]
    if len(vals) != N_LEVELS:
        raise ValueError(f"distribution must have {N_LEVELS} entries, got {len(vals)}")
    if any(x < 0 or x > 1 for x in vals) or abs(sum(vals) - 1.0) > _DIST_TOL:
        raise ValueError(f"not a distribution over levels: {vals}")
    return vals


def average(p: Sequence[float]) -> float:
    """Expected ordinal level, sum of p(i) * i over the codes 0, 1, 2."""
    vals = _check_distribution(p)
    return sum(x * i for i, x in enumerate(vals))


def uncertainty(p: Sequence[float]) -> float:
    """Normalized entropy in [0, 1]: 1 at the flat distribution, 0 at a point mass.

    Computed as sum(p ln p) / ln(1/3); zero entries contribute nothing.
    """
    vals = _check_distribution(p)
    h = -sum(x * math.log(x) for x in vals if x > 0.0)
    return min(1.0, h / _MAX_ENTROPY)


@dataclass(frozen=True)
class TraceRow:
    """One (week, competence) line of a belief trace."""

    week: int
    competence: str
    avg: float
    uncertainty: float
    p_low: float
    p_medium: float
    p_high: float

    def __post_init__(self):
        _check_distribution((self.p_low, self.p_medium, self.p_high))

    @classmethod
    def from_distribution(cls, week: int, competence: str, p: Sequence[float]) -> "TraceRow":
        vals = _check_distribution(p)
        return cls(
            week=week,
            competence=competence,
            avg=average(vals),
            uncertainty=uncertainty(vals),
            p_low=vals[0],
            p_medium=vals[1],
            p_high=vals[2],
        )
