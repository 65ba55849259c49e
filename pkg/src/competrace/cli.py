"""Command-line interface.

Subcommands:
  validate      check a competence map file and report diagnostics
  tables        print a relationship table (raw and normalized) as CSV
  compile       emit canonical map text and/or a DOT rendering of the map
  trace         run an evidence schedule and write the weekly belief trace
  oracle-check  compare the elimination engine against brute-force enumeration
  analyze       compare a trace against reference estimates

Exit codes: 0 success, 1 validation/analysis failure, 2 usage error,
3 file I/O error. All numeric output uses 15 significant digits and is
deterministic for a given set of flags.
"""

from __future__ import annotations

import argparse
import io
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import AnalysisError, AnalysisReport, compare, load_reference_file
from .cpd import (
    ConditionalTable,
    evidence_table,
    identity_table,
    inclusion_table,
    specialization_table,
    temporal_table,
)
from .dbn import (
    BeliefState,
    EvidenceEvent,
    build_static,
    build_unrolled,
    initial_beliefs,
    network_to_dot,
    rollout,
)
from .inference import InferenceError, eliminate, enumerate_joint
from .mapmodel import (
    LEVELS,
    CompetenceMap,
    MapError,
    load_bundled_map,
    load_map,
    map_to_dot,
    serialize_map,
    validate,
)
from .metrics import TraceRow
from .plots import plot_comparison, plot_trace
from .sim import builtin_profiles, get_profile, load_evidence_file, run_profile, states_to_rows

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3

ORACLE_TOL = 1e-9
PROFILE_NAMES = ("L2M", "M2H", "LT_M2H")
TRACE_HEADER = "week,competence,avg,uncertainty,p_low,p_medium,p_high"


def fmt(x: float) -> str:
    """Format a number with 15 significant digits, locale-independent."""
    return format(float(x), ".15g")


def write_trace_csv(rows: Sequence[TraceRow]) -> str:
    """Render trace rows as CSV text, sorted by (week, competence)."""
    lines = [TRACE_HEADER]
    for row in sorted(rows, key=lambda r: (r.week, r.competence)):
        lines.append(
            ",".join(
                [
                    str(row.week),
                    row.competence,
                    fmt(row.avg),
                    fmt(row.uncertainty),
                    fmt(row.p_low),
                    fmt(row.p_medium),
                    fmt(row.p_high),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def read_trace_csv(text: str) -> list[TraceRow]:
    """Parse trace CSV text back into rows (strict header)."""
    reader = csv.DictReader(io.StringIO(text))
    expected = TRACE_HEADER.split(",")
    if reader.fieldnames != expected:
        raise AnalysisError(
            f"trace file must have header {TRACE_HEADER!r}, got {reader.fieldnames}"
        )
    rows = []
    for i, rec in enumerate(reader, start=2):
        try:
            rows.append(
                TraceRow(
                    week=int(rec["week"]),
                    competence=rec["competence"],
                    avg=float(rec["avg"]),
                    uncertainty=float(rec["uncertainty"]),
                    p_low=float(rec["p_low"]),
                    p_medium=float(rec["p_medium"]),
                    p_high=float(rec["p_high"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise AnalysisError(f"trace file line {i}: {exc}") from exc
    return rows


def _write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_map_arg(path: str | None) -> CompetenceMap:
    return load_bundled_map() if path is None else load_map(path)


@dataclass(frozen=True)
class RunConfig:
    """Resolved options for a single trace run."""

    map_path: str | None  # None = bundled map
    profile: str | None
    evidence_path: str | None
    horizon: int | None
    out: str | None
    slice1_map_factors: bool = False
    relaxation: float = 1.0
    seed: int | None = None
    figures: str | None = None
    dot: str | None = None

    def __post_init__(self):
        if (self.profile is None) == (self.evidence_path is None):
            raise ValueError(
                "exactly one evidence source (profile or evidence file) required"
            )
        if self.horizon is not None and self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if self.relaxation <= 0:
            raise ValueError(f"relaxation scale must be > 0, got {self.relaxation}")


# --- subcommands ------------------------------------------------------------


def cmd_validate(args, parser) -> int:
    try:
        cmap = load_map(args.map)
    except MapError as exc:
        print(f"{args.map}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    diagnostics = validate(cmap)  # load_map already raises, but keep the contract explicit
    for diag in diagnostics:
        print(f"{args.map}: {diag}", file=sys.stderr)
    if diagnostics:
        return EXIT_FAILURE
    print(f"{args.map}: ok ({len(cmap.competences)} competences, {len(cmap.edges)} edges)")
    return EXIT_OK


def _table_for(args, parser) -> ConditionalTable:
    if args.rel == "inclusion":
        if args.n is None:
            parser.error("--n is required with --rel inclusion")
        return inclusion_table(args.n)
    if args.n is not None:
        parser.error("--n only applies to --rel inclusion")
    if args.rel == "specialization":
        return specialization_table()
    if args.rel == "evidence":
        return evidence_table()
    if args.rel == "temporal":
        return temporal_table(relaxation_scale=args.relaxation)
    return identity_table()


def cmd_tables(args, parser) -> int:
    table = _table_for(args, parser)
    lines = ["child,parent,raw,normalized"]
    for j, parent in enumerate(LEVELS):
        for i, child in enumerate(LEVELS):
            lines.append(
                f"{child.label},{parent.label},{fmt(table.raw[i, j])},{fmt(table.values[i, j])}"
            )
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_compile(args, parser) -> int:
    cmap = _load_map_arg(args.map)
    text = serialize_map(cmap)
    if args.out is None and args.dot is None:
        sys.stdout.write(text)
    if args.out is not None:
        _write_text(args.out, text)
    if args.dot is not None:
        _write_text(args.dot, map_to_dot(cmap))
    return EXIT_OK


def _run_config(config: RunConfig) -> int:
    cmap = _load_map_arg(config.map_path)
    if config.profile is not None:
        profile = get_profile(config.profile)
        schedule, horizon = profile.schedule, profile.horizon
        stem = profile.name
    else:
        schedule = load_evidence_file(config.evidence_path)
        horizon = max((e.week for e in schedule), default=0)
        stem = Path(config.evidence_path).stem
    if config.horizon is not None:
        horizon = config.horizon
    states = rollout(
        cmap,
        schedule,
        horizon,
        slice1_map_factors=config.slice1_map_factors,
        relaxation_scale=config.relaxation,
    )
    rows = states_to_rows(states)
    text = write_trace_csv(rows)
    if config.out is None:
        sys.stdout.write(text)
    else:
        _write_text(config.out, text)
    if config.figures is not None:
        for path in plot_trace(rows, config.figures, stem=stem):
            print(f"wrote {path}", file=sys.stderr)
    if config.dot is not None:
        week1 = [e for e in schedule if e.week == 1]
        net = build_unrolled(
            cmap,
            states[0],
            week1,
            slice1_map_factors=config.slice1_map_factors,
            relaxation_scale=config.relaxation,
        )
        _write_text(config.dot, network_to_dot(net))
    return EXIT_OK


def cmd_trace(args, parser) -> int:
    if args.all_profiles:
        if args.out is None:
            parser.error("--all-profiles requires --out DIRECTORY")
        if args.dot is not None:
            parser.error("--dot applies to a single run, not --all-profiles")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for profile in builtin_profiles():
            config = RunConfig(
                map_path=args.map,
                profile=profile.name,
                evidence_path=None,
                horizon=args.horizon,
                out=str(out_dir / f"{profile.name}.csv"),
                slice1_map_factors=args.slice1_map_factors,
                relaxation=args.relaxation,
                figures=args.figures,
            )
            status = _run_config(config)
            if status != EXIT_OK:
                return status
        return EXIT_OK
    config = RunConfig(
        map_path=args.map,
        profile=args.profile,
        evidence_path=args.evidence,
        horizon=args.horizon,
        out=args.out,
        slice1_map_factors=args.slice1_map_factors,
        relaxation=args.relaxation,
        figures=args.figures,
        dot=args.dot,
    )
    return _run_config(config)


def cmd_oracle_check(args, parser) -> int:
    cmap = _load_map_arg(args.map)
    if args.weeks < 1:
        parser.error("--weeks must be >= 1")
    rng = np.random.default_rng(args.seed)
    ids = cmap.ids
    max_disc = 0.0

    # Static network first: checked marginals seed the rollout.
    beliefs = initial_beliefs(cmap)
    factors, _ = build_static(cmap)
    queries = list(ids)
    exact = enumerate_joint(factors, {}, queries)
    for cid in ids:
        disc = float(np.max(np.abs(beliefs[cid] - exact[cid])))
        max_disc = max(max_disc, disc)
    print(f"t=0 static network: max discrepancy {fmt(max_disc)}")

    for week in range(1, args.weeks + 1):
        events = [
            EvidenceEvent(week, str(rng.choice(ids)), int(rng.integers(0, 3)))
        ]
        net = build_unrolled(cmap, beliefs, events)
        term = [net.term_nodes[cid] for cid in ids]
        fast = eliminate(net.factors, net.evidence, term)
        slow = enumerate_joint(net.factors, net.evidence, term)
        week_disc = 0.0
        new = {}
        for cid in ids:
            node = net.term_nodes[cid]
            week_disc = max(week_disc, float(np.max(np.abs(fast[node] - slow[node]))))
            new[cid] = fast[node]
        max_disc = max(max_disc, week_disc)
        beliefs = BeliefState(t=week, beliefs=new)
        print(
            f"week {week} ({events[0].competence}={events[0].level}): "
            f"max discrepancy {fmt(week_disc)}"
        )

    print(f"overall max discrepancy {fmt(max_disc)} (tolerance {fmt(ORACLE_TOL)})")
    if max_disc > ORACLE_TOL:
        print("engines disagree beyond tolerance", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def render_report_csv(report: AnalysisReport) -> str:
    """Render an analysis report as long-format CSV."""
    lines = ["profile,scope,competence,stat,value"]

    def add(scope: str, competence: str, stat: str, value: float) -> None:
        lines.append(f"{report.profile},{scope},{competence},{stat},{fmt(value)}")

    for comp in report.comparisons:
        add("competence", comp.competence, "weeks", len(comp.weeks))
        add("competence", comp.competence, "pearson_r", comp.pearson_r)
        add("competence", comp.competence, "coverage", comp.coverage)
        add("competence", comp.competence, "system_uncertainty_mean", comp.system_uncertainty_mean)
        add(
            "competence",
            comp.competence,
            "reference_uncertainty_median",
            comp.reference_uncertainty_median,
        )
    for label, summary in (
        ("estimate", report.estimate_consistency),
        ("uncertainty", report.uncertainty_consistency),
    ):
        add("consistency", label, "minimum", summary.minimum)
        add("consistency", label, "q1", summary.q1)
        add("consistency", label, "median", summary.median)
        add("consistency", label, "q3", summary.q3)
        add("consistency", label, "maximum", summary.maximum)
        add("consistency", label, "meta_iqr", summary.meta_iqr)
    return "\n".join(lines) + "\n"


def render_report_summary(report: AnalysisReport) -> str:
    """Render an analysis report as human-readable text."""
    out = [f"profile {report.profile}: {len(report.comparisons)} competences compared"]
    for comp in report.comparisons:
        out.append(
            f"  {comp.competence}: r={comp.pearson_r:.4f} over {len(comp.weeks)} weeks; "
            f"{100 * comp.coverage:.1f}% of system estimates inside the reference "
            f"quartile range; mean system uncertainty {comp.system_uncertainty_mean:.4f} "
            f"vs reference median {comp.reference_uncertainty_median:.4f}"
        )
    for label, summary in (
        ("estimates", report.estimate_consistency),
        ("uncertainties", report.uncertainty_consistency),
    ):
        out.append(
            f"  reference {label} IQR spread: min {summary.minimum:g} / "
            f"q1 {summary.q1:g} / median {summary.median:g} / q3 {summary.q3:g} / "
            f"max {summary.maximum:g} (IQR of IQRs {summary.meta_iqr:g})"
        )
    return "\n".join(out) + "\n"


def cmd_analyze(args, parser) -> int:
    trace_rows = read_trace_csv(Path(args.trace).read_text(encoding="utf-8"))
    reference = load_reference_file(args.reference)
    system = [(r.week, r.competence, r.avg, r.uncertainty) for r in trace_rows]
    report = compare(system, reference, args.profile)
    text = render_report_csv(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write_text(args.out, text)
    if args.summary:
        sys.stdout.write(render_report_summary(report))
    if args.figures is not None:
        for path in plot_comparison(trace_rows, report, args.figures, stem=report.profile):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="competrace",
        description=(
            "Compile competence maps into two-slice dynamic Bayesian networks, "
            "trace belief evolution over weekly evidence, and compare traces "
            "against reference estimates."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a competence map file")
    p.add_argument("map", help="map file to check")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tables", help="print a relationship table as CSV")
    p.add_argument(
        "--rel",
        required=True,
        choices=["specialization", "inclusion", "evidence", "temporal", "identity"],
        help="relationship family",
    )
    p.add_argument("--n", type=int, help="sub-competence count (inclusion only)")
    p.add_argument(
        "--relaxation",
        type=float,
        default=1.0,
        help="temporal sigma scale (temporal only, default 1.0)",
    )
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("compile", help="emit canonical map text and/or DOT")
    p.add_argument("--map", help="map file (default: bundled)")
    p.add_argument("--out", help="write canonical map text here")
    p.add_argument("--dot", help="write a DOT rendering of the map here")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("trace", help="run an evidence schedule, write the belief trace")
    p.add_argument("--map", help="map file (default: bundled)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile", choices=list(PROFILE_NAMES), help="builtin profile")
    src.add_argument("--evidence", help="evidence schedule CSV (week,competence,level)")
    src.add_argument(
        "--all-profiles", action="store_true", help="run every builtin profile"
    )
    p.add_argument("--horizon", type=int, help="override the number of weeks")
    p.add_argument("--out", help="output CSV file (directory with --all-profiles)")
    p.add_argument(
        "--slice1-map-factors",
        action="store_true",
        help="also attach map tables to the first slice (sensitivity probe)",
    )
    p.add_argument(
        "--relaxation",
        type=float,
        default=1.0,
        help="temporal sigma scale (default 1.0)",
    )
    p.add_argument("--figures", help="directory for rendered figure files")
    p.add_argument("--dot", help="write the week-1 unrolled network DOT here")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser(
        "oracle-check",
        help="compare variable elimination against brute-force enumeration",
    )
    p.add_argument("--map", help="map file (default: bundled)")
    p.add_argument("--weeks", type=int, default=5, help="weeks to roll (default 5)")
    p.add_argument(
        "--seed", type=int, default=0, help="seed for the generated schedule (default 0)"
    )
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("analyze", help="compare a trace against reference estimates")
    p.add_argument("--trace", required=True, help="trace CSV produced by `trace`")
    p.add_argument(
        "--reference",
        required=True,
        help="reference CSV (profile,week,competence,respondent,estimate,certainty)",
    )
    p.add_argument("--profile", required=True, help="profile name to select")
    p.add_argument("--out", help="report CSV file (default: stdout)")
    p.add_argument(
        "--summary", action="store_true", help="also print a human-readable summary"
    )
    p.add_argument("--figures", help="directory for rendered comparison figures")
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MapError, AnalysisError, InferenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
