"""Directed-graph substrate: DAG validation, reachability, connectivity,
equivalence-class (CPDAG) conversion and longest-path layering.

All types here are immutable after construction and safe to share across
threads; "mutation" means building a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CycleDetected, DuplicateEdge, UnknownVariable, VariableInTwoTiers

Edge = tuple[str, str]


class Dag:
    """Immutable directed acyclic graph over named variables.

    The variable order is canonical (normally the dataset column order) and
    every deterministic iteration in the package derives from it.
    Construction validates everything: unknown endpoints, self loops,
    duplicate arcs and directed cycles are all rejected.
    """

    __slots__ = ("variables", "edges", "_index", "_parents", "_children")

    def __init__(self, variables: Iterable[str], edges: Iterable[Edge] = ()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("variable names must be unique")
        index = {name: i for i, name in enumerate(variables)}

        seen: set[Edge] = set()
        parents: dict[str, list[str]] = {v: [] for v in variables}
        children: dict[str, list[str]] = {v: [] for v in variables}
        for parent, child in edges:
            if parent not in index:
                raise UnknownVariable(parent)
            if child not in index:
                raise UnknownVariable(child)
            if parent == child:
                raise CycleDetected([parent, parent])
            if (parent, child) in seen:
                raise DuplicateEdge(f"{parent} -> {child}")
            seen.add((parent, child))
            parents[child].append(parent)
            children[parent].append(child)

        cycle = _find_cycle(variables, children)
        if cycle is not None:
            raise CycleDetected(cycle)

        self.variables = variables
        self.edges = frozenset(seen)
        self._index = index
        self._parents = {v: tuple(sorted(ps, key=index.__getitem__)) for v, ps in parents.items()}
        self._children = {v: tuple(sorted(cs, key=index.__getitem__)) for v, cs in children.items()}

    # -- basic queries -------------------------------------------------

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def parents(self, v: str) -> tuple[str, ...]:
        self.index_of(v)
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        self.index_of(v)
        return self._children[v]

    def in_degree(self, v: str) -> int:
        return len(self.parents(v))

    def has_edge(self, parent: str, child: str) -> bool:
        return (parent, child) in self.edges

    def adjacent(self, a: str, b: str) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        """Edges in canonical (parent index, child index) order."""
        idx = self._index
        return sorted(self.edges, key=lambda e: (idx[e[0]], idx[e[1]]))

    def topological_order(self) -> list[str]:
        """Kahn's algorithm, breaking ties by variable index."""
        indeg = {v: len(self._parents[v]) for v in self.variables}
        ready = [v for v in self.variables if indeg[v] == 0]
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            added = False
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
                    added = True
            if added:
                ready.sort(key=self._index.__getitem__)
        return order

    # -- derived graphs ------------------------------------------------

    def with_edges(self, edges: Iterable[Edge]) -> "Dag":
        return Dag(self.variables, edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.variables == other.variables and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.variables, self.edges))

    def __repr__(self) -> str:
        arcs = ", ".join(f"{p}->{c}" for p, c in self.sorted_edges())
        return f"Dag({len(self.variables)} vars: {arcs or 'no arcs'})"


def _find_cycle(variables, children) -> list[str] | None:
    """Return one directed cycle as a vertex list, or None. Iterative DFS."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {v: WHITE for v in variables}
    parent_on_stack: dict[str, str] = {}
    for root in variables:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(children[root]))]
        color[root] = GREY
        while stack:
            v, it = stack[-1]
            advanced = False
            for c in it:
                if color[c] == GREY:
                    # unwind the grey chain from v back to c
                    chain = [v]
                    cur = v
                    while cur != c:
                        cur = parent_on_stack[cur]
                        chain.append(cur)
                    chain.reverse()
                    return chain + [c]
                if color[c] == WHITE:
                    color[c] = GREY
                    parent_on_stack[c] = v
                    stack.append((c, iter(children[c])))
                    advanced = True
                    break
            if not advanced:
                color[v] = BLACK
                stack.pop()
    return None


def validate_dag(variables: Iterable[str], edge_list: Iterable[Edge]) -> Dag:
    """Build a :class:`Dag`, rejecting unknown endpoints, self loops,
    duplicate arcs and cycles."""
    return Dag(variables, edge_list)


def ancestors(dag: Dag, v: str) -> frozenset[str]:
    """All vertices with a directed path to ``v`` (``v`` itself excluded)."""
    dag.index_of(v)
    seen: set[str] = set()
    frontier = list(dag.parents(v))
    while frontier:
        u = frontier.pop()
        if u in seen:
            continue
        seen.add(u)
        frontier.extend(dag.parents(u))
    return frozenset(seen)


def descendants(dag: Dag, v: str) -> frozenset[str]:
    """All vertices reachable from ``v`` (``v`` itself excluded)."""
    dag.index_of(v)
    seen: set[str] = set()
    frontier = list(dag.children(v))
    while frontier:
        u = frontier.pop()
        if u in seen:
            continue
        seen.add(u)
        frontier.extend(dag.children(u))
    return frozenset(seen)


def weakly_connected_components(dag: Dag) -> list[frozenset[str]]:
    """Partition of the variables into weakly connected blocks, ordered by
    the smallest variable index in each block."""
    unvisited = set(dag.variables)
    blocks: list[frozenset[str]] = []
    for start in dag.variables:
        if start not in unvisited:
            continue
        block: set[str] = set()
        frontier = [start]
        while frontier:
            u = frontier.pop()
            if u not in unvisited:
                continue
            unvisited.discard(u)
            block.add(u)
            frontier.extend(dag.parents(u))
            frontier.extend(dag.children(u))
        blocks.append(frozenset(block))
    return blocks


Pair = tuple[str, str]


def _sorted_pair(a: str, b: str, index: dict[str, int]) -> Pair:
    return (a, b) if index[a] < index[b] else (b, a)


@dataclass(frozen=True)
class Cpdag:
    """Completed partially directed acyclic graph: one Markov equivalence
    class. ``directed`` holds compelled arcs, ``undirected`` holds
    reversible adjacencies as index-sorted pairs."""

    variables: tuple[str, ...]
    directed: frozenset[Edge]
    undirected: frozenset[Pair]

    @property
    def adjacency_count(self) -> int:
        return len(self.directed) + len(self.undirected)


def to_cpdag(dag: Dag) -> Cpdag:
    """Convert a DAG to the CPDAG of its Markov equivalence class.

    Standard compelled-edge construction: keep the skeleton, direct the
    v-structure arcs, then propagate orientations with the Meek rules until
    a fixed point. Two equivalent DAGs (same skeleton and v-structures) map
    to the identical Cpdag.
    """
    index = dag._index
    adj: dict[str, set[str]] = {v: set() for v in dag.variables}
    for p, c in dag.edges:
        adj[p].add(c)
        adj[c].add(p)

    directed: set[Edge] = set()
    for v in dag.variables:
        ps = dag.parents(v)
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                if not dag.adjacent(ps[i], ps[j]):
                    directed.add((ps[i], v))
                    directed.add((ps[j], v))

    def is_directed(a, b):
        return (a, b) in directed

    def is_undirected(a, b):
        return b in adj[a] and (a, b) not in directed and (b, a) not in directed

    changed = True
    while changed:
        changed = False
        for a in dag.variables:
            for b in adj[a]:
                if not is_undirected(a, b):
                    continue
                # R1: c -> a, a - b, c and b non-adjacent  =>  a -> b
                if any(is_directed(c, a) and b not in adj[c] and c != b for c in adj[a]):
                    directed.add((a, b))
                    changed = True
                    continue
                # R2: a -> c -> b with a - b  =>  a -> b
                if any(is_directed(a, c) and is_directed(c, b) for c in adj[a] & adj[b]):
                    directed.add((a, b))
                    changed = True
                    continue
                # R3: a - c -> b, a - d -> b, c and d non-adjacent  =>  a -> b
                spokes = [c for c in adj[a] & adj[b] if is_undirected(a, c) and is_directed(c, b)]
                if any(s2 not in adj[s1] for s1 in spokes for s2 in spokes if s1 != s2):
                    directed.add((a, b))
                    changed = True

    undirected = {
        _sorted_pair(p, c, index)
        for p, c in dag.edges
        if (p, c) not in directed and (c, p) not in directed
    }
    return Cpdag(dag.variables, frozenset(directed), frozenset(undirected))


class TemporalTiers:
    """Ordered, disjoint variable subsets; tier 1 is earliest. Tiers may
    omit variables (the ordering is incomplete)."""

    __slots__ = ("tiers", "_tier_of")

    def __init__(self, tiers: Sequence[Iterable[str]]):
        frozen = tuple(frozenset(t) for t in tiers)
        tier_of: dict[str, int] = {}
        for level, tier in enumerate(frozen, start=1):
            for v in tier:
                if v in tier_of:
                    raise VariableInTwoTiers(v)
                tier_of[v] = level
        self.tiers = frozen
        self._tier_of = tier_of

    def tier_of(self, v: str) -> int | None:
        """1-based tier index, or None for variables outside the ordering."""
        return self._tier_of.get(v)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(self._tier_of)

    def __len__(self) -> int:
        return len(self.tiers)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalTiers):
            return NotImplemented
        return self.tiers == other.tiers

    def __repr__(self) -> str:
        return f"TemporalTiers({[sorted(t) for t in self.tiers]})"


def layer_by_longest_path(dag: Dag) -> TemporalTiers:
    """Layer the graph so that tier(v) = 1 + longest directed path from any
    root to v. Every parent then sits strictly below each child, with the
    minimal number of tiers."""
    depth: dict[str, int] = {}
    for v in dag.topological_order():
        ps = dag.parents(v)
        depth[v] = 1 + max((depth[p] for p in ps), default=-1)
    n_tiers = 1 + max(depth.values(), default=0)
    tiers = [[] for _ in range(n_tiers)]
    for v in dag.variables:
        tiers[depth[v]].append(v)
    return TemporalTiers(tiers)
