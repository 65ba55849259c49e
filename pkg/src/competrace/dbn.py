"""Two-slice dynamic network compilation and belief rollout.

A competence map compiles into an unrolled network with four node banks per
competence: an init node loaded with the stored belief, a slice-1 node that
copies it, a slice-2 node conditioned on its slice-1 counterpart (temporal
link) and on its map parents in slice 2, and a term node that copies slice 2
back out. Observed performances attach to slice-2 nodes as evidence children.
Only per-competence marginals cross from one step to the next (a fully
factored frontier), so each weekly update is one exact-inference pass over
this small network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import cpd
from .inference import Factor, eliminate
from .mapmodel import (
    N_LEVELS,
    CompetenceMap,
    MapError,
    RelationshipType,
    sub_competence_count,
)

BELIEF_TOL = 1e-9


@dataclass(frozen=True)
class BeliefState:
    """Per-competence level distributions at integer time ``t`` (weeks)."""

    t: int
    beliefs: dict[str, np.ndarray]

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"time index must be >= 0, got {self.t}")
        frozen: dict[str, np.ndarray] = {}
        for cid, p in self.beliefs.items():
            arr = np.asarray(p, dtype=float)
            if arr.shape != (N_LEVELS,):
                raise ValueError(f"belief for {cid!r} must have {N_LEVELS} entries")
            if (arr < 0).any() or (arr > 1).any() or abs(arr.sum() - 1.0) > BELIEF_TOL:
                raise ValueError(f"belief for {cid!r} is not a distribution: {arr}")
            arr = arr.copy()
            arr.setflags(write=False)
            frozen[cid] = arr
        object.__setattr__(self, "beliefs", frozen)

    def __getitem__(self, cid: str) -> np.ndarray:
        return self.beliefs[cid]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.beliefs))


@dataclass(frozen=True)
class EvidenceEvent:
    """One observed performance: (week, competence id, observed level)."""

    week: int
    competence: str
    level: int

    def __post_init__(self):
        if self.week < 1:
            raise ValueError(f"evidence week must be >= 1, got {self.week}")
        if not (0 <= int(self.level) < N_LEVELS):
            raise ValueError(f"level must be in 0..{N_LEVELS - 1}, got {self.level!r}")
        object.__setattr__(self, "level", int(self.level))


@dataclass(frozen=True)
class RolloutClock:
    """Progress marker for a rollout: current slice t out of target k."""

    t: int
    k: int

    def __post_init__(self):
        if not (0 <= self.t <= self.k):
            raise ValueError(f"clock requires 0 <= t <= k, got t={self.t}, k={self.k}")

    def advance(self) -> "RolloutClock":
        return RolloutClock(self.t + 1, self.k)

    @property
    def done(self) -> bool:
        return self.t == self.k


@dataclass(frozen=True)
class UnrolledNetwork:
    """One compiled step of the dynamic network, ready for exact inference."""

    factors: tuple[Factor, ...]
    evidence: dict[str, int]
    init_nodes: dict[str, str]
    slice1_nodes: dict[str, str]
    slice2_nodes: dict[str, str]
    term_nodes: dict[str, str]
    evidence_nodes: tuple[tuple[str, str], ...]  # (node id, competence id)
    arcs: tuple[tuple[str, str, str], ...] = field(default=())  # (src, dst, tag)


def _table_factor(table: cpd.ConditionalTable, child: str, parents: Sequence[str]) -> Factor:
    """CPD table -> factor with scope (child, *parents); parents follow the
    table's column encoding order."""
    k = len(parents)
    if table.parent_count != k:
        raise ValueError(f"table has {table.parent_count} parents, got {k} names")
    values = table.values.reshape((N_LEVELS,) + (N_LEVELS,) * k)
    return Factor((child, *parents), values)


def _map_cpd(cmap: CompetenceMap, cid: str, rename) -> tuple[cpd.ConditionalTable, tuple[str, ...]]:
    """Combined CPD for a node with map parents; ``rename`` maps competence
    ids to network variable names. Returns (table, parent vars in table order)."""
    parts = []
    for edge in cmap.parents_of(cid):
        if edge.kind == RelationshipType.SPECIALIZATION:
            table = cpd.specialization_table()
        else:
            table = cpd.inclusion_table(sub_competence_count(cmap, edge.parent))
        parts.append((table, rename(edge.parent)))
    combined = cpd.combine(parts)
    return combined, combined.parents


def uniform_belief() -> np.ndarray:
    return np.full(N_LEVELS, 1.0 / N_LEVELS)


def build_static(cmap: CompetenceMap) -> tuple[list[Factor], list[str]]:
    """Single-slice network: flat priors on parentless nodes, map CPDs below."""
    factors: list[Factor] = []
    for c in cmap.competences:
        if cmap.parents_of(c.id):
            table, parents = _map_cpd(cmap, c.id, lambda p: p)
            factors.append(_table_factor(table, c.id, parents))
        else:
            factors.append(Factor((c.id,), uniform_belief()))
    return factors, list(cmap.ids)


def initial_beliefs(cmap: CompetenceMap) -> BeliefState:
    """Propagate flat priors through the static network; the t=0 state."""
    factors, ids = build_static(cmap)
    result = eliminate(factors, {}, ids)
    return BeliefState(0, {cid: result[cid] for cid in ids})


def build_unrolled(
    cmap: CompetenceMap,
    beliefs: BeliefState,
    events: Sequence[EvidenceEvent] = (),
    *,
    slice1_map_factors: bool = False,
    relaxation_scale: float = 1.0,
) -> UnrolledNetwork:
    """Compile one step of the dynamic network.

    Wiring per competence c (node names carry a bank prefix):
      init:c   unary prior = stored belief
      s1:c     identity copy of init:c
      s2:c     temporal link from s1:c combined with map CPDs from its
               slice-2 parents
      term:c   identity copy of s2:c
      ev:c     evidence child of s2:c, present only for observed events

    With ``slice1_map_factors`` the slice-1 bank additionally carries the map
    CPDs as extra potentials, re-smoothing stored beliefs through the map
    before time advances (the identity copies stay in place).
    """
    ids = set(cmap.ids)
    if set(beliefs.beliefs) != ids:
        raise MapError("belief state does not cover exactly the map's competences")
    for ev in events:
        if ev.competence not in ids:
            raise MapError(f"unknown competence id: {ev.competence!r}")

    init = {cid: f"init:{cid}" for cid in ids}
    s1 = {cid: f"s1:{cid}" for cid in ids}
    s2 = {cid: f"s2:{cid}" for cid in ids}
    term = {cid: f"term:{cid}" for cid in ids}

    factors: list[Factor] = []
    arcs: list[tuple[str, str, str]] = []
    identity = cpd.identity_table()
    temporal = cpd.temporal_table(relaxation_scale)

    for cid in sorted(ids):
        factors.append(Factor((init[cid],), beliefs[cid]))
        factors.append(_table_factor(identity, s1[cid], (init[cid],)))
        arcs.append((init[cid], s1[cid], "copy"))

        map_edges = cmap.parents_of(cid)
        parts = [(temporal, s1[cid])]
        for edge in map_edges:
            if edge.kind == RelationshipType.SPECIALIZATION:
                parts.append((cpd.specialization_table(), s2[edge.parent]))
            else:
                parts.append(
                    (cpd.inclusion_table(sub_competence_count(cmap, edge.parent)), s2[edge.parent])
                )
            arcs.append((s2[edge.parent], s2[cid], edge.kind.value))
        combined = cpd.combine(parts)
        factors.append(_table_factor(combined, s2[cid], combined.parents))
        arcs.append((s1[cid], s2[cid], "temporal"))

        if slice1_map_factors and map_edges:
            table, parents = _map_cpd(cmap, cid, lambda p: s1[p])
            factors.append(_table_factor(table, s1[cid], parents))
            for edge in map_edges:
                arcs.append((s1[edge.parent], s1[cid], edge.kind.value))

        factors.append(_table_factor(identity, term[cid], (s2[cid],)))
        arcs.append((s2[cid], term[cid], "copy"))

    evidence: dict[str, int] = {}
    evidence_nodes: list[tuple[str, str]] = []
    counts: dict[str, int] = {}
    ev_table = cpd.evidence_table()
    for ev in events:
        counts[ev.competence] = counts.get(ev.competence, 0) + 1
        suffix = "" if counts[ev.competence] == 1 else f":{counts[ev.competence]}"
        node = f"ev:{ev.competence}{suffix}"
        factors.append(_table_factor(ev_table, node, (s2[ev.competence],)))
        arcs.append((s2[ev.competence], node, "evidence"))
        evidence[node] = ev.level
        evidence_nodes.append((node, ev.competence))

    return UnrolledNetwork(
        factors=tuple(factors),
        evidence=evidence,
        init_nodes=init,
        slice1_nodes=s1,
        slice2_nodes=s2,
        term_nodes=term,
        evidence_nodes=tuple(evidence_nodes),
        arcs=tuple(arcs),
    )


def step(
    cmap: CompetenceMap,
    beliefs: BeliefState,
    events: Sequence[EvidenceEvent] = (),
    *,
    slice1_map_factors: bool = False,
    relaxation_scale: float = 1.0,
) -> BeliefState:
    """Advance the belief state one week, absorbing the given evidence."""
    net = build_unrolled(
        cmap,
        beliefs,
        events,
        slice1_map_factors=slice1_map_factors,
        relaxation_scale=relaxation_scale,
    )
    queries = [net.term_nodes[cid] for cid in sorted(net.term_nodes)]
    result = eliminate(net.factors, net.evidence, queries)
    return BeliefState(
        beliefs.t + 1,
        {cid: result[net.term_nodes[cid]] for cid in net.term_nodes},
    )


def rollout(
    cmap: CompetenceMap,
    schedule: Sequence[EvidenceEvent],
    horizon: int,
    *,
    slice1_map_factors: bool = False,
    relaxation_scale: float = 1.0,
) -> list[BeliefState]:
    """Full trajectory t = 0..horizon; each event fires in its week's step."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    by_week: dict[int, list[EvidenceEvent]] = {}
    for ev in schedule:
        if ev.week > horizon:
            raise ValueError(f"event at week {ev.week} is beyond horizon {horizon}")
        by_week.setdefault(ev.week, []).append(ev)
    states = [initial_beliefs(cmap)]
    clock = RolloutClock(0, horizon)
    while not clock.done:
        clock = clock.advance()
        states.append(
            step(
                cmap,
                states[-1],
                by_week.get(clock.t, ()),
                slice1_map_factors=slice1_map_factors,
                relaxation_scale=relaxation_scale,
            )
        )
    return states


def network_to_dot(net: UnrolledNetwork) -> str:
    """GraphViz rendering with init / temporal-plate / term clusters and
    evidence nodes pinned at the bottom."""
    def node_line(var: str) -> str:
        return f'    "{var}";'

    lines = [
        "digraph unrolled {",
        "  rankdir=LR;",
        '  node [shape=ellipse, fontname="Helvetica"];',
        "  subgraph cluster_init {",
        '    label="Init Conditions";',
    ]
    lines += [node_line(v) for _, v in sorted(net.init_nodes.items())]
    lines += [
        "  }",
        "  subgraph cluster_plate {",
        '    label="Temporal Plate";',
    ]
    lines += [node_line(v) for _, v in sorted(net.slice1_nodes.items())]
    lines += [node_line(v) for _, v in sorted(net.slice2_nodes.items())]
    lines += [
        "  }",
        "  subgraph cluster_term {",
        '    label="Term Conditions";',
    ]
    lines += [node_line(v) for _, v in sorted(net.term_nodes.items())]
    lines += ["  }"]
    for node, _cid in net.evidence_nodes:
        lines.append(f'  "{node}" [shape=box];')
    if net.evidence_nodes:
        ranked = "; ".join(f'"{node}"' for node, _ in net.evidence_nodes)
        lines.append(f"  {{ rank=sink; {ranked}; }}")
    styles = {
        "copy": "[style=solid]",
        "temporal": "[style=bold]",
        "specializes": "[style=dashed]",
        "includes": '[style=solid, label="includes"]',
        "evidence": "[style=dotted]",
    }
    for src, dst, tag in net.arcs:
        lines.append(f'  "{src}" -> "{dst}" {styles[tag]};')
    lines.append("}")
    return "\n".join(lines) + "\n"
