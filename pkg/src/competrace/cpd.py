"""Conditional probability tables for the four relationship families.

Each family is a 3x3 column-stochastic table over the Low/Medium/High levels,
with columns indexed by the parent level. Raw entries are either fuzzy-term
weights (values of the standard normal CDF at small negative offsets) or, for
the inclusion family, exact level-counting ratios. Columns are normalized
after raw assignment, with structural zeros floored to the smallest fuzzy
value so no configuration is ever impossible. ``combine`` merges several
single-parent tables into one joint-parent table via a normalized product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .mapmodel import N_LEVELS

#: Column sums must be exact to this tolerance after normalization.
STOCHASTIC_TOL = 1e-12


def phi(sigma: float) -> float:
    """Standard normal CDF, the map from fuzzy-term offsets to probabilities.

    Monotone increasing, phi(0) == 0.5 exactly.
    """
    if not math.isfinite(sigma):
        raise ValueError(f"sigma must be finite, got {sigma!r}")
    return 0.5 * math.erfc(-sigma / math.sqrt(2.0))


class FuzzyTerm(Enum):
    """Qualitative probability weights; the enum value is the CDF offset."""

    LARGE = 0
    MEDIUM = -1
    SMALL = -2
    VERY_SMALL = -3
    TINY = -4

    @property
    def sigma(self) -> float:
        return float(self.value)

    @property
    def probability(self) -> float:
        return phi(self.sigma)


@dataclass(frozen=True)
class ConditionalTable:
    """Column-stochastic table: rows = child levels, columns = parent configs.

    For k parents the table has 3**k columns; column index encodes the parent
    levels big-endian in ``parents`` order (first parent most significant).
    ``raw`` keeps the pre-floor, pre-normalization entries for audit.
    """

    relationship: str
    raw: np.ndarray
    values: np.ndarray
    parents: tuple[str, ...] = ()

    def __post_init__(self):
        raw = np.array(self.raw, dtype=float)
        values = np.array(self.values, dtype=float)
        if raw.shape != values.shape or raw.ndim != 2 or raw.shape[0] != N_LEVELS:
            raise ValueError(f"table must be {N_LEVELS}xM, got {raw.shape} / {values.shape}")
        m = raw.shape[1]
        k = round(math.log(m, N_LEVELS))
        if N_LEVELS**k != m or k < 1:
            raise ValueError(f"column count {m} is not a positive power of {N_LEVELS}")
        if self.parents and len(self.parents) != k:
            raise ValueError(f"{len(self.parents)} parent ids for {k}-parent table")
        if (raw < 0).any() or (values < 0).any():
            raise ValueError("table entries must be non-negative")
        sums = values.sum(axis=0)
        if np.abs(sums - 1.0).max() > STOCHASTIC_TOL:
            raise ValueError(f"columns must sum to 1 within {STOCHASTIC_TOL}: {sums}")
        raw.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "values", values)

    @property
    def parent_count(self) -> int:
        return round(math.log(self.values.shape[1], N_LEVELS))


def _floor_and_normalize(relationship: str, raw: np.ndarray) -> ConditionalTable:
    floored = raw.copy()
    floored[floored == 0.0] = FuzzyTerm.TINY.probability
    values = floored / floored.sum(axis=0, keepdims=True)
    return ConditionalTable(relationship, raw, values)


def specialization_table() -> ConditionalTable:
    """Child = specific competence given parent = its generalization."""
    L, M, S, VS = (
        FuzzyTerm.LARGE.probability,
        FuzzyTerm.MEDIUM.probability,
        FuzzyTerm.SMALL.probability,
        FuzzyTerm.VERY_SMALL.probability,
    )
    raw = np.array(
        [
            [L, M, S],
            [S, L, L],
            [VS, S, M],
        ]
    )
    return _floor_and_normalize("specialization", raw)


def inclusion_raw_columns(n: int) -> tuple[list[Fraction], list[Fraction]]:
    """Exact Low and Medium columns of the inclusion family for n sub-competences.

    Both columns are ratios of level-counting configurations over the n
    sub-competences and sum to exactly 1; the Medium column has a structural
    zero at n=1 that the floor later replaces.
    """
    if n < 1:
        raise ValueError(f"sub-competence count must be >= 1, got {n}")
    low_denom = 3**n - 2**n
    low = [
        Fraction(3 ** (n - 1), low_denom),
        Fraction(3 ** (n - 1) - 2 ** (n - 1), low_denom),
        Fraction(3 ** (n - 1) - 2 ** (n - 1), low_denom),
    ]
    medium = [
        Fraction(1, 2**n),
        Fraction(1, 2),
        Fraction(2 ** (n - 1) - 1, 2**n),
    ]
    return low, medium


def inclusion_table(n: int) -> ConditionalTable:
    """Child = one of n sub-competences given parent = the super-competence."""
    low, medium = inclusion_raw_columns(n)
    high = [
        FuzzyTerm.VERY_SMALL.probability,
        FuzzyTerm.SMALL.probability,
        FuzzyTerm.LARGE.probability,
    ]
    raw = np.array(
        [[float(lo), float(me), hi] for lo, me, hi in zip(low, medium, high)]
    )
    return _floor_and_normalize(f"inclusion(n={n})", raw)


def evidence_table() -> ConditionalTable:
    """Child = observed performance given parent = the competence level."""
    L, M, S, VS = (
        FuzzyTerm.LARGE.probability,
        FuzzyTerm.MEDIUM.probability,
        FuzzyTerm.SMALL.probability,
        FuzzyTerm.VERY_SMALL.probability,
    )
    raw = np.array(
        [
            [L, M, S],
            [S, L, M],
            [VS, M, L],
        ]
    )
    return _floor_and_normalize("evidence", raw)


def temporal_table(relaxation_scale: float = 1.0) -> ConditionalTable:
    """Child = current level given parent = previous level.

    ``relaxation_scale`` multiplies every fuzzy offset before the CDF is
    applied; 1.0 reproduces the stock table (the diagonal offset is 0, so it
    is unaffected), values below 1 make level changes more plausible.
    """
    if not (relaxation_scale > 0):
        raise ValueError(f"relaxation scale must be > 0, got {relaxation_scale!r}")
    sig = {
        term: term.sigma * relaxation_scale
        for term in (FuzzyTerm.LARGE, FuzzyTerm.VERY_SMALL, FuzzyTerm.TINY)
    }
    L = phi(sig[FuzzyTerm.LARGE])
    VS = phi(sig[FuzzyTerm.VERY_SMALL])
    T = phi(sig[FuzzyTerm.TINY])
    raw = np.array(
        [
            [L, VS, T],
            [VS, L, VS],
            [T, T, L],
        ]
    )
    return _floor_and_normalize("temporal", raw)


def identity_table() -> ConditionalTable:
    """Deterministic copy link: child equals parent. Exempt from the zero floor."""
    eye = np.eye(N_LEVELS)
    return ConditionalTable("identity", eye, eye)


def combine(parts: Sequence[tuple[ConditionalTable, str]]) -> ConditionalTable:
    """Merge single-parent tables into one table over the joint parent set.

    Each joint column is the elementwise product of the member columns,
    renormalized, treating every relationship as an independent soft
    constraint on the child. Inputs are canonicalized by parent id so the
    result does not depend on argument order. Reduces to the single table
    at k=1.
    """
    if not parts:
        raise ValueError("combine needs at least one (table, parent id) pair")
    for table, pid in parts:
        if table.parent_count != 1:
            raise ValueError(f"combine takes single-parent tables, got {table.relationship}")
    ids = [pid for _, pid in parts]
    if len(set(ids)) != len(ids):
        raise ValueError(f"parent ids must be distinct: {ids}")
    ordered = sorted(parts, key=lambda p: p[1])
    if len(ordered) == 1:
        table, pid = ordered[0]
        return ConditionalTable(table.relationship, table.raw, table.values, (pid,))

    k = len(ordered)
    # joint[v, u1, ..., uk] = prod_j values_j[v, uj]
    joint = np.ones((N_LEVELS,) + (N_LEVELS,) * k)
    for axis, (table, _) in enumerate(ordered, start=1):
        shape = [1] * (k + 1)
        shape[0] = N_LEVELS
        shape[axis] = N_LEVELS
        joint = joint * table.values.reshape(shape)
    raw = joint.reshape(N_LEVELS, N_LEVELS**k)
    sums = raw.sum(axis=0, keepdims=True)
    if (sums == 0).any():
        raise ValueError("a joint parent configuration has zero total mass")
    names = " * ".join(t.relationship for t, _ in ordered)
    return ConditionalTable(names, raw, raw / sums, tuple(pid for _, pid in ordered))
