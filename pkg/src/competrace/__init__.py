"""Belief tracing over competence maps.

Compile a competence map (specialization and inclusion relationships) into a
two-slice dynamic Bayesian network, roll weekly evidence through it with exact
inference, and compare the resulting belief traces against reference
estimates.
"""

from .analysis import (
    AnalysisError,
    AnalysisReport,
    CompetenceComparison,
    ConsistencySummary,
    EstimateSeries,
    ReferenceResponse,
    compare,
    iqr_consistency,
    load_reference_csv,
    load_reference_file,
    pearson,
    quartiles,
    range_coverage,
)
from .cpd import (
    ConditionalTable,
    FuzzyTerm,
    combine,
    evidence_table,
    identity_table,
    inclusion_table,
    phi,
    specialization_table,
    temporal_table,
)
from .dbn import (
    BeliefState,
    EvidenceEvent,
    RolloutClock,
    UnrolledNetwork,
    build_static,
    build_unrolled,
    initial_beliefs,
    network_to_dot,
    rollout,
    step,
)
from .inference import (
    Factor,
    InconsistentEvidenceError,
    InferenceError,
    StateSpaceGuardError,
    eliminate,
    enumerate_joint,
)
from .mapmodel import (
    Competence,
    CompetenceLevel,
    CompetenceMap,
    Diagnostic,
    Edge,
    MapError,
    MapSyntaxError,
    MapValidationError,
    RelationshipType,
    load_bundled_map,
    load_map,
    map_to_dot,
    parse_map,
    serialize_map,
    sub_competence_count,
    topological_order,
    validate,
)
from .metrics import TraceRow, average, uncertainty
from .sim import (
    StudentProfile,
    builtin_profiles,
    get_profile,
    load_evidence_csv,
    load_evidence_file,
    run_profile,
    states_to_rows,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "AnalysisReport",
    "BeliefState",
    "Competence",
    "CompetenceComparison",
    "CompetenceLevel",
    "CompetenceMap",
    "ConditionalTable",
    "ConsistencySummary",
    "Diagnostic",
    "Edge",
    "EstimateSeries",
    "EvidenceEvent",
    "Factor",
    "FuzzyTerm",
    "InconsistentEvidenceError",
    "InferenceError",
    "MapError",
    "MapSyntaxError",
    "MapValidationError",
    "ReferenceResponse",
    "RelationshipType",
    "RolloutClock",
    "StateSpaceGuardError",
    "StudentProfile",
    "TraceRow",
    "UnrolledNetwork",
    "average",
    "builtin_profiles",
    "build_static",
    "build_unrolled",
    "combine",
    "compare",
    "eliminate",
    "enumerate_joint",
    "evidence_table",
    "get_profile",
    "identity_table",
    "inclusion_table",
    "initial_beliefs",
    "iqr_consistency",
    "load_bundled_map",
    "load_evidence_csv",
    "load_evidence_file",
    "load_map",
    "load_reference_csv",
    "load_reference_file",
    "map_to_dot",
    "network_to_dot",
    "parse_map",
    "pearson",
    "phi",
    "quartiles",
    "range_coverage",
    "rollout",
    "run_profile",
    "serialize_map",
    "specialization_table",
    "states_to_rows",
    "step",
    "sub_competence_count",
    "temporal_table",
    "topological_order",
    "uncertainty",
    "validate",
]
