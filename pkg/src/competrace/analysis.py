"""Comparison statistics between system traces and human reference estimates.

Reference data arrives as per-respondent Likert estimates (a 0/0.5/1/1.5/2
grid) with certainty ratings on the same grid; certainty is inverted and
normalized to an uncertainty score at ingestion. The statistics are
deliberately non-parametric: quartiles by linear interpolation, an
IQR-of-IQRs consistency summary, Pearson correlation between aligned weekly
series, and the fraction of system estimates falling inside the reference
interquartile band.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

LIKERT_MIN = 0.0
LIKERT_MAX = 2.0
LIKERT_STEP = 0.5  # conventional answer grid; ingestion only enforces the range


class AnalysisError(ValueError):
    """Raised for unusable inputs: empty data, misaligned series, zero variance."""


@dataclass(frozen=True)
class EstimateSeries:
    """Weekly values for one competence; weeks strictly increasing."""

    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        weeks = [w for w, _ in self.points]
        if sorted(set(weeks)) != weeks:
            raise AnalysisError(f"weeks must be strictly increasing: {weeks}")
        for w, v in self.points:
            if not (LIKERT_MIN <= v <= LIKERT_MAX):
                raise AnalysisError(f"value {v} at week {w} outside [0, 2]")

    @property
    def weeks(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.points)

    def value_at(self, week: int) -> float:
        for w, v in self.points:
            if w == week:
                return v
        raise KeyError(week)


def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """(q1, median, q3) by linear interpolation at p*(n-1) on the sorted data."""
    if len(values) == 0:
        raise AnalysisError("quartiles of an empty list")
    qs = np.quantile(np.asarray(values, dtype=float), [0.25, 0.5, 0.75])
    return float(qs[0]), float(qs[1]), float(qs[2])


def iqr(values: Sequence[float]) -> float:
    q1, _, q3 = quartiles(values)
    return q3 - q1


@dataclass(frozen=True)
class ConsistencySummary:
    """Five-number summary plus IQR over a collection of per-question IQRs."""

    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    meta_iqr: float


def iqr_consistency(per_question_values: Sequence[Sequence[float]]) -> ConsistencySummary:
    """IQR per question, then the quartile summary of those IQRs."""
    if len(per_question_values) == 0:
        raise AnalysisError("consistency analysis needs at least one question")
    iqrs = [iqr(vals) for vals in per_question_values]
    q1, med, q3 = quartiles(iqrs)
    return ConsistencySummary(
        minimum=min(iqrs), q1=q1, median=med, q3=q3, maximum=max(iqrs), meta_iqr=q3 - q1
    )


def _join(a: EstimateSeries, b: EstimateSeries) -> list[tuple[float, float]]:
    common = [w for w in a.weeks if w in set(b.weeks)]
    return [(a.value_at(w), b.value_at(w)) for w in common]


def pearson(a: EstimateSeries, b: EstimateSeries) -> float:
    """Product-moment correlation of the two series joined on week."""
    pairs = _join(a, b)
    if len(pairs) < 2:
        raise AnalysisError(
            f"series share only {len(pairs)} week(s); need at least 2 to correlate"
        )
    xs = np.array([x for x, _ in pairs])
    ys = np.array([y for _, y in pairs])
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise AnalysisError("zero variance in a series; correlation undefined")
    return float(np.clip((dx * dy).sum() / (sx * sy), -1.0, 1.0))


def range_coverage(
    system: EstimateSeries, q1_series: EstimateSeries, q3_series: EstimateSeries
) -> float:
    """Fraction of aligned weeks where q1 <= system value <= q3 (inclusive)."""
    weeks = [
        w
        for w in system.weeks
        if w in set(q1_series.weeks) and w in set(q3_series.weeks)
    ]
    if not weeks:
        raise AnalysisError("no common weeks between system and reference quartiles")
    inside = sum(
        1
        for w in weeks
        if q1_series.value_at(w) <= system.value_at(w) <= q3_series.value_at(w)
    )
    return inside / len(weeks)


@dataclass(frozen=True)
class ReferenceResponse:
    """One respondent's estimate for one (profile, week, competence) question."""

    profile: str
    week: int
    competence: str
    respondent: str
    estimate: float
    uncertainty: float  # certainty inverted and normalized to [0, 1]


def _check_range(value: float, column: str, line: int) -> float:
    # Responses normally sit on the 0/0.5/1/1.5/2 answer scale, but any value
    # in range is accepted so system traces can be fed back in as a reference.
    if not (LIKERT_MIN <= value <= LIKERT_MAX):
        raise AnalysisError(
            f"reference file line {line}: {column} {value} is outside "
            f"[{LIKERT_MIN}, {LIKERT_MAX}]"
        )
    return value


def load_reference_csv(text: str) -> list[ReferenceResponse]:
    """Parse reference data: header profile,week,competence,respondent,estimate,certainty."""
    reader = csv.DictReader(io.StringIO(text))
    expected = ["profile", "week", "competence", "respondent", "estimate", "certainty"]
    if reader.fieldnames != expected:
        raise AnalysisError(
            f"reference file must have header {','.join(expected)}, got {reader.fieldnames}"
        )
    rows: list[ReferenceResponse] = []
    for i, row in enumerate(reader, start=2):
        try:
            estimate = _check_range(float(row["estimate"]), "estimate", i)
            certainty = _check_range(float(row["certainty"]), "certainty", i)
            rows.append(
                ReferenceResponse(
                    profile=row["profile"],
                    week=int(row["week"]),
                    competence=row["competence"],
                    respondent=row["respondent"],
                    estimate=estimate,
                    uncertainty=(LIKERT_MAX - certainty) / (LIKERT_MAX - LIKERT_MIN),
                )
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, AnalysisError):
                raise
            raise AnalysisError(f"reference file line {i}: {exc}") from exc
    if not rows:
        raise AnalysisError("reference file has no data rows")
    return rows


def load_reference_file(path: str | Path) -> list[ReferenceResponse]:
    return load_reference_csv(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class CompetenceComparison:
    """Per-competence comparison between system trace and reference estimates."""

    competence: str
    weeks: tuple[int, ...]
    pearson_r: float
    coverage: float
    system_series: EstimateSeries
    reference_median: EstimateSeries
    reference_q1: EstimateSeries
    reference_q3: EstimateSeries
    reference_uncertainty_median: float
    system_uncertainty_mean: float


@dataclass(frozen=True)
class AnalysisReport:
    """Full comparison output for one profile."""

    profile: str
    comparisons: tuple[CompetenceComparison, ...]
    estimate_consistency: ConsistencySummary
    uncertainty_consistency: ConsistencySummary


def compare(
    system_rows: Iterable[tuple[int, str, float, float]],
    reference: Sequence[ReferenceResponse],
    profile: str,
) -> AnalysisReport:
    """Align a system trace with reference responses for one profile.

    ``system_rows`` are (week, competence, avg, uncertainty) tuples. For each
    competence present on both sides, reference respondents are aggregated to
    weekly median/q1/q3 and compared to the system's weekly averages.
    """
    ref = [r for r in reference if r.profile == profile]
    if not ref:
        raise AnalysisError(f"reference file has no rows for profile {profile!r}")

    by_question: dict[tuple[str, int], list[ReferenceResponse]] = {}
    for r in ref:
        by_question.setdefault((r.competence, r.week), []).append(r)

    system_by_comp: dict[str, dict[int, tuple[float, float]]] = {}
    for week, cid, avg, unc in system_rows:
        system_by_comp.setdefault(cid, {})[week] = (avg, unc)

    comps = sorted({c for c, _ in by_question} & set(system_by_comp))
    if not comps:
        raise AnalysisError("system trace and reference data share no competences")

    comparisons = []
    for cid in comps:
        weeks = sorted(
            w for (c, w) in by_question if c == cid and w in system_by_comp[cid]
        )
        if len(weeks) < 2:
            raise AnalysisError(
                f"competence {cid!r}: only {len(weeks)} aligned week(s); need 2"
            )
        med_pts, q1_pts, q3_pts, sys_pts = [], [], [], []
        unc_values = []
        for w in weeks:
            responses = by_question[(cid, w)]
            q1, med, q3 = quartiles([r.estimate for r in responses])
            med_pts.append((w, med))
            q1_pts.append((w, q1))
            q3_pts.append((w, q3))
            sys_pts.append((w, system_by_comp[cid][w][0]))
            unc_values.extend(r.uncertainty for r in responses)
        system_series = EstimateSeries(tuple(sys_pts))
        median_series = EstimateSeries(tuple(med_pts))
        q1_series = EstimateSeries(tuple(q1_pts))
        q3_series = EstimateSeries(tuple(q3_pts))
        comparisons.append(
            CompetenceComparison(
                competence=cid,
                weeks=tuple(weeks),
                pearson_r=pearson(system_series, median_series),
                coverage=range_coverage(system_series, q1_series, q3_series),
                system_series=system_series,
                reference_median=median_series,
                reference_q1=q1_series,
                reference_q3=q3_series,
                reference_uncertainty_median=quartiles(unc_values)[1],
                system_uncertainty_mean=float(
                    np.mean([system_by_comp[cid][w][1] for w in weeks])
                ),
            )
        )

    estimate_consistency = iqr_consistency(
        [[r.estimate for r in rs] for rs in by_question.values()]
    )
    uncertainty_consistency = iqr_consistency(
        [[r.uncertainty for r in rs] for rs in by_question.values()]
    )
    return AnalysisReport(
        profile=profile,
        comparisons=tuple(comparisons),
        estimate_consistency=estimate_consistency,
        uncertainty_consistency=uncertainty_consistency,
    )
