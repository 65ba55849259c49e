"""Built-in simulated students and trace production.

Three scripted performance profiles drive the bundled project-collaboration
map: low-to-medium (L2M), medium-to-high with a failed final evaluation
(M2H), and a two-term medium-to-high run (LT_M2H). Each profile is a fixed
evidence schedule over the project-specific competences plus a horizon in
weeks: 16 for the single-term profiles (14 teaching weeks plus 2 revision
weeks) and 37 for the two-term one (a 5-week break between terms, slices keep
advancing throughout).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dbn import BeliefState, EvidenceEvent, rollout
from .mapmodel import CompetenceMap
from .metrics import TraceRow

PROPOSE = "propose-on-project"
CONTRIBUTE = "contribute-to-project"
COLLABORATE = "collaborate-in-project"


@dataclass(frozen=True)
class StudentProfile:
    """A named evidence schedule with its rollout horizon."""

    name: str
    schedule: tuple[EvidenceEvent, ...]
    horizon: int

    def __post_init__(self):
        weeks = [ev.week for ev in self.schedule]
        if list(weeks) != sorted(weeks):
            raise ValueError(f"profile {self.name!r}: events must be sorted by week")
        if weeks and self.horizon < max(weeks):
            raise ValueError(
                f"profile {self.name!r}: horizon {self.horizon} is before the last event"
            )


def _events(rows: Sequence[tuple[int, str, int]]) -> tuple[EvidenceEvent, ...]:
    return tuple(EvidenceEvent(week, cid, level) for week, cid, level in rows)


def builtin_profiles() -> list[StudentProfile]:
    """The three scripted students, in declaration order L2M, M2H, LT_M2H."""
    l2m = StudentProfile(
        "L2M",
        _events(
            [
                (1, PROPOSE, 0),
                (2, CONTRIBUTE, 0),
                (4, PROPOSE, 1),
                (5, CONTRIBUTE, 0),
                (7, COLLABORATE, 0),
                (10, PROPOSE, 1),
                (11, CONTRIBUTE, 1),
                (14, COLLABORATE, 1),
            ]
        ),
        horizon=16,
    )
    m2h = StudentProfile(
        "M2H",
        _events(
            [
                (1, PROPOSE, 1),
                (2, CONTRIBUTE, 1),
                (4, PROPOSE, 2),
                (5, CONTRIBUTE, 1),
                (7, COLLABORATE, 1),
                (10, PROPOSE, 2),
                (11, CONTRIBUTE, 2),
                (14, COLLABORATE, 0),
            ]
        ),
        horizon=16,
    )
    lt_m2h = StudentProfile(
        "LT_M2H",
        _events(
            [
                (1, PROPOSE, 1),
                (2, CONTRIBUTE, 1),
                (4, PROPOSE, 2),
                (5, CONTRIBUTE, 1),
                (7, COLLABORATE, 1),
                (10, PROPOSE, 2),
                (11, CONTRIBUTE, 2),
                (14, COLLABORATE, 2),
                (23, PROPOSE, 2),
                (24, CONTRIBUTE, 2),
                (25, COLLABORATE, 2),
                (35, COLLABORATE, 2),
            ]
        ),
        horizon=37,
    )
    return [l2m, m2h, lt_m2h]


def get_profile(name: str) -> StudentProfile:
    for profile in builtin_profiles():
        if profile.name.lower() == name.lower():
            return profile
    names = ", ".join(p.name for p in builtin_profiles())
    raise KeyError(f"unknown profile {name!r}; builtin profiles: {names}")


def states_to_rows(states: Sequence[BeliefState]) -> list[TraceRow]:
    """Flatten a trajectory into (week, competence)-sorted trace rows."""
    rows: list[TraceRow] = []
    for state in states:
        for cid in state.ids:
            rows.append(TraceRow.from_distribution(state.t, cid, state[cid]))
    return rows


def run_profile(
    cmap: CompetenceMap,
    profile: StudentProfile,
    *,
    slice1_map_factors: bool = False,
    relaxation_scale: float = 1.0,
    horizon: int | None = None,
) -> list[TraceRow]:
    """Roll the profile's schedule over the map and flatten to trace rows."""
    states = rollout(
        cmap,
        profile.schedule,
        profile.horizon if horizon is None else horizon,
        slice1_map_factors=slice1_map_factors,
        relaxation_scale=relaxation_scale,
    )
    return states_to_rows(states)


def load_evidence_csv(text: str) -> tuple[EvidenceEvent, ...]:
    """Parse an evidence schedule: CSV with header week,competence,level."""
    reader = csv.DictReader(io.StringIO(text))
    expected = ["week", "competence", "level"]
    if reader.fieldnames != expected:
        raise ValueError(
            f"evidence file must have header {','.join(expected)}, "
            f"got {reader.fieldnames}"
        )
    events = []
    for i, row in enumerate(reader, start=2):
        try:
            events.append(
                EvidenceEvent(int(row["week"]), row["competence"], int(row["level"]))
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"evidence file line {i}: {exc}") from exc
    return tuple(sorted(events, key=lambda e: (e.week, e.competence)))


def load_evidence_file(path: str | Path) -> tuple[EvidenceEvent, ...]:
    return load_evidence_csv(Path(path).read_text(encoding="utf-8"))
