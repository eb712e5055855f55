"""The ten knowledge approaches: required/undirected/forbidden edges,
relaxed and strict temporal tiers, initial graph, connectedness, target
weights, and decision/utility annotations — plus the constraint-file
parsers, graph/move validity checks and constrained starting graphs.

Temporal semantics include the ancestral extension: a variable in a higher
tier may be neither a parent nor an ancestor of a variable in a lower tier,
so a chain A -> B -> C violates tiers {t1: C, t2: A} even though no direct
arc joins A and C. The strict variant additionally bans arcs inside a tier.
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    ConstraintConflict,
    CycleDetected,
    DuplicateConstraint,
    MalformedRow,
    OverlappingRoles,
    UnknownVariable,
    UnsatisfiableSeed,
)
from .graph import Dag, Edge, Pair, TemporalTiers, weakly_connected_components
from .scoring import UNIT_WEIGHTS, TargetWeights

APPROACH_IDS = (
    "dir-edg", "und-edg", "for-edg", "rel-tem", "str-tem",
    "ini-gra", "var-rel", "tar-var", "rel-bdn", "str-bdn",
)


@dataclass(frozen=True)
class BdnAnnotation:
    """Decision and utility node sets for decision-network conversion."""

    decisions: frozenset[str]
    utilities: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "decisions", frozenset(self.decisions))
        object.__setattr__(self, "utilities", frozenset(self.utilities))
        overlap = self.decisions & self.utilities
        if overlap:
            raise OverlappingRoles(", ".join(sorted(overlap)))


@dataclass(frozen=True)
class BdnGraph:
    """A learnt graph annotated as a decision network.

    Node kinds partition the variables into chance/decision/utility; arcs
    entering a decision are informational, all others conditional. Purely
    presentational: the edge set equals the underlying dag's.
    """

    dag: Dag
    node_kinds: dict[str, str]
    arc_kinds: dict[Edge, str]


class KnowledgeSpec:
    """Union record of every constraint approach, bound to a variable set.

    Construction validates the inputs: unknown names, duplicated pairs,
    required-vs-forbidden contradictions and cyclic required arcs are all
    rejected up front, so a spec that constructs is internally consistent.
    """

    __slots__ = (
        "variables", "_index", "directed_edges", "undirected_edges",
        "forbidden_edges", "tiers", "tiers_strict", "initial_graph",
        "variables_relevant", "target_weights", "bdn", "bdn_strict",
    )

    def __init__(
        self,
        variables: Iterable[str],
        directed_edges: Iterable[Edge] = (),
        undirected_edges: Iterable[Pair] = (),
        forbidden_edges: Iterable[Pair] = (),
        tiers: TemporalTiers | None = None,
        tiers_strict: bool = False,
        initial_graph: Dag | None = None,
        variables_relevant: bool = False,
        target_weights: TargetWeights = UNIT_WEIGHTS,
        bdn: BdnAnnotation | None = None,
        bdn_strict: bool = False,
    ):
        self.variables = tuple(variables)
        self._index = {v: i for i, v in enumerate(self.variables)}

        def check(name):
            if name not in self._index:
                raise UnknownVariable(name)
            return name

        def key(pair):
            return tuple(sorted(pair, key=self._index.__getitem__))

        directed = []
        for p, c in directed_edges:
            check(p), check(c)
            if (p, c) in directed:
                raise DuplicateConstraint(f"{p} -> {c}")
            directed.append((p, c))
        undirected = []
        for a, b in undirected_edges:
            pair = key((check(a), check(b)))
            if pair in undirected:
                raise DuplicateConstraint(f"{a} - {b}")
            undirected.append(pair)
        forbidden = []
        for a, b in forbidden_edges:
            pair = key((check(a), check(b)))
            if pair in forbidden:
                raise DuplicateConstraint(f"{a} x {b}")
            forbidden.append(pair)

        forbidden_set = set(forbidden)
        for p, c in directed:
            if key((p, c)) in forbidden_set:
                raise ConstraintConflict(f"{p} -> {c} is both required and forbidden")
        for pair in undirected:
            if pair in forbidden_set:
                raise ConstraintConflict(f"{pair[0]} - {pair[1]} is both required and forbidden")

        try:
            Dag(self.variables, directed)
        except CycleDetected as exc:
            raise ConstraintConflict(f"required arcs are cyclic ({exc})") from exc

        if tiers is not None:
            for v in tiers.variables:
                check(v)
        if initial_graph is not None and tuple(initial_graph.variables) != self.variables:
            raise UnknownVariable("initial graph is defined over different variables")
        if bdn is not None:
            for v in bdn.decisions | bdn.utilities:
                check(v)

        self.directed_edges = frozenset(directed)
        self.undirected_edges = frozenset(undirected)
        self.forbidden_edges = frozenset(forbidden)
        self.tiers = tiers
        self.tiers_strict = bool(tiers_strict)
        self.initial_graph = initial_graph
        self.variables_relevant = bool(variables_relevant)
        self.target_weights = target_weights
        self.bdn = bdn
        self.bdn_strict = bool(bdn_strict)

    def is_empty(self) -> bool:
        return not (self.directed_edges or self.undirected_edges or self.forbidden_edges
                    or self.tiers or self.initial_graph or self.variables_relevant
                    or self.bdn or self.target_weights.targets)

    def pair_key(self, a: str, b: str) -> Pair:
        return tuple(sorted((a, b), key=self._index.__getitem__))


def empty_spec(variables: Iterable[str]) -> KnowledgeSpec:
    return KnowledgeSpec(variables)


# -- constraint file parsing ------------------------------------------


def _read_rows(source) -> list[list[str]]:
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    return [row for row in csv.reader(_io.StringIO(text))]


def parse_edge_constraints(source, kind: str = "directed") -> list[Pair]:
    """Parse an edge-constraint CSV into pairs in file order.

    Layout is a leading identifier column followed by two endpoint columns
    (``ID,Parent,Child`` for directed files, ``ID,Var1,Var2`` for
    undirected or forbidden ones). ``kind`` controls duplicate detection:
    undirected files treat (A,B) and (B,A) as the same constraint.
    Variable names are bound later, when a KnowledgeSpec is built.
    """
    if kind not in ("directed", "undirected"):
        raise ValueError(f"unknown edge-constraint kind: {kind}")
    rows = _read_rows(source)
    if not rows:
        return []
    pairs: list[Pair] = []
    seen = set()
    for row in rows[1:]:
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise MalformedRow(f"expected 3 columns, got {len(row)}: {row}")
        a, b = row[1].strip(), row[2].strip()
        if not a or not b:
            raise MalformedRow(f"blank endpoint in row {row}")
        dedup = (a, b) if kind == "directed" else tuple(sorted((a, b)))
        if dedup in seen:
            raise DuplicateConstraint(f"{a}, {b}")
        seen.add(dedup)
        pairs.append((a, b))
    return pairs


def parse_tiers(source) -> TemporalTiers:
    """Parse a temporal-constraint CSV with header ``ID,Tier 1,..,Tier k``.

    Tier t is the union of the non-blank cells in column t across all data
    rows; a variable listed in two tiers is an error.
    """
    rows = _read_rows(source)
    if not rows:
        raise MalformedRow("empty tier file")
    n_tiers = len(rows[0]) - 1
    if n_tiers < 1:
        raise MalformedRow("tier file needs at least one tier column")
    tiers: list[list[str]] = [[] for _ in range(n_tiers)]
    for row in rows[1:]:
        if not any(cell.strip() for cell in row):
            continue
        if len(row) > n_tiers + 1:
            raise MalformedRow(f"row has more cells than tier columns: {row}")
        for t, cell in enumerate(row[1:]):
            name = cell.strip()
            if name:
                tiers[t].append(name)
    return TemporalTiers(tiers)


def parse_bdn_roles(source) -> BdnAnnotation:
    """Parse a decision/utility CSV with header ``ID,Decision,Utility``;
    blank cells are allowed."""
    rows = _read_rows(source)
    decisions, utilities = [], []
    for row in rows[1:]:
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise MalformedRow(f"expected 3 columns, got {len(row)}: {row}")
        if row[1].strip():
            decisions.append(row[1].strip())
        if row[2].strip():
            utilities.append(row[2].strip())
    return BdnAnnotation(frozenset(decisions), frozenset(utilities))


# -- graph-level checks ------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _temporal_violations(variables, parents_map, tiers: TemporalTiers,
                         strict: bool) -> list[Violation]:
    out = []
    tiered = [v for v in variables if tiers.tier_of(v) is not None]
    # ancestral check: a higher-tier variable may not reach a lower-tier one
    for w in tiered:
        tw = tiers.tier_of(w)
        seen: set[str] = set()
        frontier = list(parents_map[w])
        while frontier:
            u = frontier.pop()
            if u in seen:
                continue
            seen.add(u)
            tu = tiers.tier_of(u)
            if tu is not None and tu > tw:
                out.append(Violation(
                    "temporal-order",
                    f"{u} (tier {tu}) is a parent or ancestor of {w} (tier {tw})"))
            frontier.extend(parents_map[u])
    if strict:
        for w in tiered:
            tw = tiers.tier_of(w)
            for u in parents_map[w]:
                if tiers.tier_of(u) == tw:
                    out.append(Violation(
                        "temporal-same-tier", f"{u} -> {w} joins two tier-{tw} variables"))
    return out


def graph_satisfies(dag: Dag, spec: KnowledgeSpec) -> list[Violation]:
    """Check a graph against every constraint family in the spec.

    Returns the list of violations (empty means the graph satisfies the
    spec). Checks, in order: required arcs present with their direction,
    required adjacencies present in some orientation, forbidden pairs
    absent in both orientations, the relaxed/strict temporal conditions,
    connectedness, and the strict decision/utility degree conditions.
    """
    out: list[Violation] = []
    for p, c in sorted(spec.directed_edges):
        if not dag.has_edge(p, c):
            out.append(Violation("missing-directed-edge", f"{p} -> {c} is required"))
    for a, b in sorted(spec.undirected_edges):
        if not dag.adjacent(a, b):
            out.append(Violation("missing-undirected-edge", f"{a} - {b} is required"))
    for a, b in sorted(spec.forbidden_edges):
        if dag.adjacent(a, b):
            out.append(Violation("forbidden-edge-present", f"{a} and {b} must not be adjacent"))
    if spec.tiers is not None:
        parents_map = {v: dag.parents(v) for v in dag.variables}
        out.extend(_temporal_violations(dag.variables, parents_map, spec.tiers, spec.tiers_strict))
    if spec.variables_relevant:
        blocks = weakly_connected_components(dag)
        if len(blocks) > 1:
            out.append(Violation("disconnected", f"graph has {len(blocks)} components"))
    if spec.bdn is not None and spec.bdn_strict:
        for d in sorted(spec.bdn.decisions):
            if not dag.children(d):
                out.append(Violation("decision-childless", f"decision {d} has no child"))
        for u in sorted(spec.bdn.utilities):
            if not dag.parents(u):
                out.append(Violation("utility-parentless", f"utility {u} has no parent"))
    return out


# -- single-arc moves --------------------------------------------------


@dataclass(frozen=True, order=False)
class Move:
    """One arc addition, removal or reversal. ``parent``/``child`` name the
    arc as it exists before the move (for a reversal, the arc being
    reversed)."""

    kind: str  # "add" | "remove" | "reverse"
    parent: str
    child: str

    def __repr__(self) -> str:
        return f"{self.kind}({self.parent}->{self.child})"


_KIND_ORDER = {"add": 0, "remove": 1, "reverse": 2}


def move_sort_key(move: Move, index) -> tuple[int, int, int]:
    return (_KIND_ORDER[move.kind], index[move.parent], index[move.child])


def _is_applicable(dag: Dag, move: Move) -> bool:
    if move.kind == "add":
        return move.parent != move.child and not dag.adjacent(move.parent, move.child)
    return dag.has_edge(move.parent, move.child)


def _post_move_parents(dag: Dag, move: Move) -> dict[str, list[str]]:
    parents = {v: list(dag.parents(v)) for v in dag.variables}
    if move.kind == "add":
        parents[move.child].append(move.parent)
    elif move.kind == "remove":
        parents[move.child].remove(move.parent)
    else:
        parents[move.child].remove(move.parent)
        parents[move.parent].append(move.child)
    return parents


def apply_move(dag: Dag, move: Move) -> Dag:
    """Return the post-move graph (validating it is still a DAG)."""
    if not _is_applicable(dag, move):
        raise ValueError(f"{move} is not applicable")
    edges = set(dag.edges)
    if move.kind == "add":
        edges.add((move.parent, move.child))
    elif move.kind == "remove":
        edges.remove((move.parent, move.child))
    else:
        edges.remove((move.parent, move.child))
        edges.add((move.child, move.parent))
    return dag.with_edges(edges)


def _reaches(children_map, src: str, dst: str, skip: Edge | None = None) -> bool:
    """Directed reachability src -> dst, optionally ignoring one arc."""
    if src == dst:
        return True
    seen = {src}
    frontier = [src]
    while frontier:
        u = frontier.pop()
        for c in children_map[u]:
            if skip is not None and (u, c) == skip:
                continue
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                frontier.append(c)
    return False


def move_is_admissible(dag: Dag, move: Move, spec: KnowledgeSpec,
                       max_indegree: int | None = None,
                       extra_forbidden_arcs: frozenset[Edge] = frozenset()) -> bool:
    """True iff the post-move graph is a DAG within the in-degree cap and
    satisfies the edge-presence, edge-absence and temporal constraint
    families of the spec.

    Required arcs may not be removed or reversed; required adjacencies may
    be reversed but not removed; forbidden adjacencies may not appear in
    either orientation. Connectedness and decision/utility conditions are
    repair phases, not move-level checks. ``extra_forbidden_arcs`` lets a
    caller ban specific ordered arcs (used by pruned candidate-parent sets).
    """
    if not _is_applicable(dag, move):
        return False

    children = {v: list(dag.children(v)) for v in dag.variables}
    if move.kind == "add":
        if _reaches(children, move.child, move.parent):
            return False
        if max_indegree is not None and dag.in_degree(move.child) + 1 > max_indegree:
            return False
        if (move.parent, move.child) in extra_forbidden_arcs:
            return False
    elif move.kind == "reverse":
        if _reaches(children, move.parent, move.child, skip=(move.parent, move.child)):
            return False
        if max_indegree is not None and dag.in_degree(move.parent) + 1 > max_indegree:
            return False
        if (move.child, move.parent) in extra_forbidden_arcs:
            return False

    post_parents = _post_move_parents(dag, move)

    def post_has(p, c):
        return p in post_parents[c]

    for p, c in spec.directed_edges:
        if not post_has(p, c):
            return False
    for a, b in spec.undirected_edges:
        if not (post_has(a, b) or post_has(b, a)):
            return False
    for a, b in spec.forbidden_edges:
        if post_has(a, b) or post_has(b, a):
            return False
    if spec.tiers is not None:
        if _temporal_violations(dag.variables, post_parents, spec.tiers, spec.tiers_strict):
            return False
    return True


# -- constrained starting graph ----------------------------------------


def seed_graph(spec: KnowledgeSpec, seed: int, max_indegree: int | None = None) -> Dag:
    """Starting graph for search under the spec.

    With an initial graph the answer is that graph, verbatim. Otherwise
    start empty, add every required arc, then orient each required
    adjacency by a seeded coin flip, falling back to the opposite direction
    (and finally to a second greedy pass) when an orientation would break
    acyclicity or the in-degree cap. Deterministic per seed.
    """
    if spec.initial_graph is not None:
        return spec.initial_graph

    variables = spec.variables
    edges = list(sorted(spec.directed_edges, key=lambda e: (spec._index[e[0]], spec._index[e[1]])))
    dag = Dag(variables, edges)
    if max_indegree is not None:
        for v in variables:
            if dag.in_degree(v) > max_indegree:
                raise UnsatisfiableSeed(f"required arcs exceed max in-degree at {v}")

    rng = np.random.default_rng(seed)
    pending = sorted(spec.undirected_edges, key=lambda e: (spec._index[e[0]], spec._index[e[1]]))
    deferred: list[Pair] = []
    for rounds in range(2):
        next_deferred: list[Pair] = []
        for a, b in pending:
            if dag.adjacent(a, b):
                continue
            first = (a, b) if rng.random() < 0.5 else (b, a)
            second = (first[1], first[0])
            placed = False
            for p, c in (first, second):
                move = Move("add", p, c)
                if move_is_admissible(dag, move, empty_spec(variables), max_indegree):
                    dag = apply_move(dag, move)
                    placed = True
                    break
            if not placed:
                next_deferred.append((a, b))
        pending = next_deferred
        if not pending:
            break
    if pending:
        raise UnsatisfiableSeed(
            "could not orient required adjacencies: " +
            ", ".join(f"{a}-{b}" for a, b in pending))
    return dag


# -- decision-network conversion ----------------------------------------


def to_bdn(dag: Dag, annotation: BdnAnnotation | None) -> BdnGraph:
    """Annotate a learnt graph as a decision network.

    Node kinds follow the annotation; arcs entering a decision become
    informational. The structure itself is unchanged — this is a
    presentation-level conversion.
    """
    annotation = annotation or BdnAnnotation(frozenset(), frozenset())
    for v in annotation.decisions | annotation.utilities:
        dag.index_of(v)
    kinds = {}
    for v in dag.variables:
        if v in annotation.decisions:
            kinds[v] = "decision"
        elif v in annotation.utilities:
            kinds[v] = "utility"
        else:
            kinds[v] = "chance"
    arc_kinds = {
        (p, c): "informational" if kinds[c] == "decision" else "conditional"
        for p, c in dag.sorted_edges()
    }
    return BdnGraph(dag, kinds, arc_kinds)
