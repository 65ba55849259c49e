"""Competence maps: typed DAGs of competences and their relationships.

A competence map is a set of competences connected by two kinds of directed
edges: generalization/specialization (parent = the more general competence)
and inclusion/part-of (parent = the super-competence, child = one of its
sub-competences). Maps are read from a line-oriented text format, validated
structurally, and serialized back in a canonical order so that equal maps
produce byte-identical files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path


class CompetenceLevel(IntEnum):
    """Ordinal development level of a competence."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def label(self) -> str:
        return self.name.title()


LEVELS = (CompetenceLevel.LOW, CompetenceLevel.MEDIUM, CompetenceLevel.HIGH)
N_LEVELS = len(LEVELS)


class RelationshipType(Enum):
    """The two edge kinds that participate in inference."""

    SPECIALIZATION = "specializes"
    INCLUSION = "includes"


@dataclass(frozen=True)
class Competence:
    """A single competence node; attributes are free-text metadata only."""

    id: str
    name: str
    attributes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Edge:
    """Directed edge parent -> child of a given relationship type."""

    parent: str
    child: str
    kind: RelationshipType

    def sort_key(self) -> tuple[str, str, str]:
        return (self.kind.value, self.parent, self.child)


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding with the node/edge it concerns."""

    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} ({self.subject}): {self.message}"


class MapError(ValueError):
    """Base class for map file problems."""


class MapSyntaxError(MapError):
    """Malformed statement; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MapValidationError(MapError):
    """Structural violations found while building a map."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class CompetenceMap:
    """Immutable competence map; edges are kept in canonical sorted order.

    Construction does not enforce structural invariants so that
    :func:`validate` can report problems on arbitrary instances; use
    :func:`parse_map` (or validate explicitly) to obtain a checked map.
    """

    competences: tuple[Competence, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "competences", tuple(sorted(self.competences, key=lambda c: c.id))
        )
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=Edge.sort_key)))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.competences)

    def competence(self, cid: str) -> Competence:
        for c in self.competences:
            if c.id == cid:
                return c
        raise MapError(f"unknown competence id: {cid!r}")

    def has_id(self, cid: str) -> bool:
        return any(c.id == cid for c in self.competences)

    def parents_of(self, cid: str) -> tuple[Edge, ...]:
        """Incoming edges of ``cid`` (its map parents)."""
        return tuple(e for e in self.edges if e.child == cid)

    def children_of(self, cid: str, kind: RelationshipType | None = None) -> tuple[Edge, ...]:
        """Outgoing edges of ``cid``, optionally filtered by relationship kind."""
        return tuple(
            e for e in self.edges if e.parent == cid and (kind is None or e.kind == kind)
        )


def sub_competence_count(cmap: CompetenceMap, super_id: str) -> int:
    """Number of inclusion children of ``super_id`` (the table parameter n)."""
    if not cmap.has_id(super_id):
        raise MapError(f"unknown competence id: {super_id!r}")
    return len(cmap.children_of(super_id, RelationshipType.INCLUSION))


def validate(cmap: CompetenceMap) -> list[Diagnostic]:
    """Check every structural invariant; empty list means the map is valid."""
    diags: list[Diagnostic] = []
    seen_ids: set[str] = set()
    for c in cmap.competences:
        if c.id in seen_ids:
            diags.append(Diagnostic("duplicate-id", c.id, "competence id declared twice"))
        seen_ids.add(c.id)
        if not c.name:
            diags.append(Diagnostic("empty-name", c.id, "competence name must be non-empty"))
        for text_field in (c.name, *c.attributes):
            if any(ch in text_field for ch in '"\n\r'):
                diags.append(
                    Diagnostic(
                        "invalid-name",
                        c.id,
                        "quoted text may not contain double quotes or line breaks",
                    )
                )

    seen_edges: set[tuple[str, str, RelationshipType]] = set()
    for e in cmap.edges:
        for endpoint in (e.parent, e.child):
            if endpoint not in seen_ids:
                diags.append(
                    Diagnostic(
                        "unknown-id",
                        f"{e.parent}->{e.child}",
                        f"edge references undeclared competence {endpoint!r}",
                    )
                )
        key = (e.parent, e.child, e.kind)
        if key in seen_edges:
            diags.append(
                Diagnostic(
                    "duplicate-edge",
                    f"{e.parent}->{e.child}",
                    f"duplicate {e.kind.value} edge",
                )
            )
        seen_edges.add(key)

    diags.extend(_cycle_diagnostics(cmap, seen_ids))
    return diags


def _cycle_diagnostics(cmap: CompetenceMap, ids: set[str]) -> list[Diagnostic]:
    """Kahn topological sort over both edge kinds; leftover nodes lie on cycles."""
    indeg = {i: 0 for i in ids}
    succs: dict[str, list[str]] = {i: [] for i in ids}
    for e in cmap.edges:
        if e.parent in ids and e.child in ids:
            indeg[e.child] += 1
            succs[e.parent].append(e.child)
    queue = sorted(i for i, d in indeg.items() if d == 0)
    done = 0
    while queue:
        node = queue.pop(0)
        done += 1
        for nxt in succs[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
        queue.sort()
    if done == len(ids):
        return []
    stuck = sorted(i for i, d in indeg.items() if d > 0)
    return [
        Diagnostic("cycle", ", ".join(stuck), "relationship edges form a directed cycle")
    ]


def topological_order(cmap: CompetenceMap) -> list[str]:
    """Parents-before-children order; raises on cyclic maps."""
    diags = _cycle_diagnostics(cmap, set(cmap.ids))
    if diags:
        raise MapValidationError(diags)
    order: list[str] = []
    remaining = set(cmap.ids)
    placed: set[str] = set()
    while remaining:
        ready = sorted(
            n
            for n in remaining
            if all(e.parent in placed for e in cmap.parents_of(n))
        )
        order.extend(ready)
        placed.update(ready)
        remaining.difference_update(ready)
    return order


_ID_RE = re.compile(r"[A-Za-z0-9_.:+-]+")
_QUOTED_RE = re.compile(r'"([^"]*)"\s*$')


def _strip_comment(line: str) -> str:
    # A # starts a comment unless inside the quoted display text.
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _take_id(token: str, line_no: int) -> str:
    if not _ID_RE.fullmatch(token):
        raise MapSyntaxError(line_no, f"invalid identifier {token!r}")
    return token


def parse_map(text: str) -> CompetenceMap:
    """Parse map-file content into a validated CompetenceMap.

    Raises MapSyntaxError (with line number) for malformed statements and
    MapValidationError when the parsed structure breaks an invariant
    (unknown ids, duplicates, cycles).
    """
    competences: list[tuple[str, str]] = []  # (id, name) in declaration order
    attributes: dict[str, list[str]] = {}
    pending_attrs: list[tuple[int, str, str]] = []  # (line, id, text)
    edges: list[Edge] = []

    # Split on \n only (tolerating \r\n): str.splitlines would also break on
    # characters like \x1e or  , which are legal inside quoted names.
    for line_no, raw_line in enumerate(text.split("\n"), start=1):
        line = _strip_comment(raw_line.removesuffix("\r")).strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword in ("competence", "attribute"):
            head, _, tail = rest.partition(" ")
            cid = _take_id(head, line_no)
            m = _QUOTED_RE.fullmatch(tail.strip())
            if m is None:
                raise MapSyntaxError(
                    line_no, f'{keyword} statement needs a double-quoted text field'
                )
            if keyword == "competence":
                competences.append((cid, m.group(1)))
            else:
                pending_attrs.append((line_no, cid, m.group(1)))
        elif keyword in ("specializes", "includes"):
            tokens = rest.split()
            if len(tokens) != 2:
                raise MapSyntaxError(line_no, f"{keyword} statement needs exactly two ids")
            parent = _take_id(tokens[0], line_no)
            child = _take_id(tokens[1], line_no)
            kind = (
                RelationshipType.SPECIALIZATION
                if keyword == "specializes"
                else RelationshipType.INCLUSION
            )
            edges.append(Edge(parent, child, kind))
        else:
            raise MapSyntaxError(line_no, f"unknown statement {keyword!r}")

    declared = {cid for cid, _ in competences}
    extra_diags: list[Diagnostic] = []
    for _line_no, cid, attr_text in pending_attrs:
        if cid in declared:
            attributes.setdefault(cid, []).append(attr_text)
        else:
            extra_diags.append(
                Diagnostic("unknown-id", cid, "attribute references undeclared competence")
            )

    cmap = CompetenceMap(
        competences=tuple(
            Competence(cid, name, tuple(attributes.get(cid, ())))
            for cid, name in competences
        ),
        edges=tuple(edges),
    )
    diags = extra_diags + validate(cmap)
    if diags:
        raise MapValidationError(diags)
    return cmap


def load_map(path: str | Path) -> CompetenceMap:
    """Read and parse a map file."""
    return parse_map(Path(path).read_text(encoding="utf-8"))


def serialize_map(cmap: CompetenceMap) -> str:
    """Emit the map in canonical statement order for reproducible diffs.

    Competences come first (lexicographic by id, each followed by its
    attribute statements in stored order), then edges sorted by statement
    text (so all `includes` lines precede all `specializes` lines).
    """
    lines: list[str] = []
    for c in cmap.competences:
        lines.append(f'competence {c.id} "{c.name}"')
        for attr in c.attributes:
            lines.append(f'attribute {c.id} "{attr}"')
    for e in cmap.edges:
        lines.append(f"{e.kind.value} {e.parent} {e.child}")
    return "\n".join(lines) + "\n"


def map_to_dot(cmap: CompetenceMap) -> str:
    """GraphViz rendering: dashed specialization edges, solid inclusion edges."""
    lines = [
        "digraph competences {",
        "  rankdir=TB;",
        '  node [shape=box, style=rounded, fontname="Helvetica"];',
    ]
    for c in cmap.competences:
        lines.append(f'  "{c.id}" [label="{c.name}"];')
    for e in cmap.edges:
        if e.kind == RelationshipType.SPECIALIZATION:
            lines.append(f'  "{e.parent}" -> "{e.child}" [style=dashed];')
        else:
            lines.append(f'  "{e.parent}" -> "{e.child}" [style=solid, label="includes"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def bundled_map_path() -> Path:
    """Path of the packaged 6-node project-collaboration map."""
    return Path(__file__).parent / "data" / "project_collaboration.cmap"


def load_bundled_map() -> CompetenceMap:
    return load_map(bundled_map_path())
