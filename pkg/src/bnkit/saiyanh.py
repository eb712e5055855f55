"""Hybrid learner: marginal-discrepancy association scores, a spanning
skeleton that keeps multiple connecting paths, constraint-flavoured edge
orientation, then tabu search restricted to graphs that keep all variables
connected (full evidence propagation is built in, so the connectedness
approach is inherent here).

The pairwise association score is the mean of four components — mean and
max absolute discrepancy between a variable's marginal distribution and
its distribution conditional on each state of the other variable, in both
directions — normalised by 0.25, living in [0, 1] and symmetric by
construction. Conditioning states that never occur contribute nothing and
are left out of the outer mean.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .graph import Dag, Edge, Pair
from .knowledge import KnowledgeSpec, empty_spec
from .model import Dataset, family_counts
from .search import LearnResult, SearchConfig, _Engine, _finish, enforce_var_rel

DEFAULT_INDEP_THRESHOLD = 0.05
DEFAULT_DEP_THRESHOLD = 0.15


def _directional_components(counts: np.ndarray) -> tuple[float, float]:
    """(mean, max) discrepancy components for A -> B given a counts table
    of shape (states of A, states of B)."""
    totals = counts.sum(axis=1)
    observed = totals > 0
    if not observed.any() or counts.sum() == 0:
        return 0.0, 0.0
    marginal = counts.sum(axis=0) / counts.sum()
    cond = counts[observed] / totals[observed, None]
    gaps = np.abs(marginal[None, :] - cond)
    mn = float(gaps.mean(axis=1).mean())
    mx = float(gaps.max(axis=1).mean())
    return mn, mx


def _mmd_from_counts(counts: np.ndarray) -> float:
    mn_ab, mx_ab = _directional_components(counts)
    mn_ba, mx_ba = _directional_components(counts.T)
    return 0.25 * (mn_ab + mx_ab + mn_ba + mx_ba)


def mmd(dataset: Dataset, a: str, b: str) -> float:
    """Symmetric [0, 1] dependency score for an unordered variable pair.

    Computed on the canonical orientation of the pair so that swapping the
    arguments returns the bit-identical value.
    """
    if a == b:
        raise ValueError("mmd needs two distinct variables")
    if dataset.index_of(a) > dataset.index_of(b):
        a, b = b, a
    counts = family_counts(dataset, b, [a])  # rows: states of a, cols: states of b
    return _mmd_from_counts(counts)


class MmdTable:
    """Symmetric map over unordered variable pairs."""

    def __init__(self, variables, scores: dict[Pair, float]):
        self.variables = tuple(variables)
        self._index = {v: i for i, v in enumerate(self.variables)}
        self._scores = dict(scores)

    def key(self, a: str, b: str) -> Pair:
        return (a, b) if self._index[a] < self._index[b] else (b, a)

    def get(self, a: str, b: str) -> float:
        return self._scores[self.key(a, b)]

    def set(self, a: str, b: str, value: float):
        self._scores[self.key(a, b)] = value

    def pairs(self) -> list[Pair]:
        return sorted(self._scores, key=lambda p: (self._index[p[0]], self._index[p[1]]))


def mmd_table(dataset: Dataset) -> MmdTable:
    scores = {}
    for a, b in combinations(dataset.variables, 2):
        scores[(a, b)] = mmd(dataset, a, b)
    return MmdTable(dataset.variables, scores)


def mmd_conditional(dataset: Dataset, a: str, b: str, given: str) -> float:
    """The pair score recomputed within each stratum of ``given`` and
    averaged over the observed strata."""
    if len({a, b, given}) != 3:
        raise ValueError("conditional mmd needs three distinct variables")
    counts = family_counts(dataset, b, [given, a])
    s_g = dataset.arity_of(given)
    s_a = dataset.arity_of(a)
    per_stratum = counts.reshape(s_g, s_a, -1)
    values = [
        _mmd_from_counts(stratum)
        for stratum in per_stratum
        if stratum.sum() > 0
    ]
    return float(np.mean(values)) if values else 0.0


@dataclass(frozen=True)
class Emsg:
    """Undirected skeleton retained from the complete graph after the
    shared-neighbor domination rule."""

    variables: tuple[str, ...]
    adjacencies: frozenset[Pair]

    def neighbors(self, v: str) -> set[str]:
        out = set()
        for a, b in self.adjacencies:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out


def emsg_from_table(table: MmdTable) -> Emsg:
    """Start complete and visit edges ascending by score; delete an edge
    exactly when, in the current graph, some shared neighbor strictly
    dominates it on both sides. Ties in the visiting order fall back to
    pair order."""
    adj: dict[str, set[str]] = {v: set() for v in table.variables}
    for a, b in combinations(table.variables, 2):
        adj[a].add(b)
        adj[b].add(a)
    index = {v: i for i, v in enumerate(table.variables)}
    order = sorted(
        combinations(table.variables, 2),
        key=lambda p: (table.get(*p), index[p[0]], index[p[1]]),
    )
    for a, b in order:
        score = table.get(a, b)
        shared = adj[a] & adj[b]
        if any(table.get(a, c) > score and table.get(b, c) > score for c in shared):
            adj[a].discard(b)
            adj[b].discard(a)
    pairs = frozenset(
        (a, b) for a, b in combinations(table.variables, 2) if b in adj[a]
    )
    return Emsg(table.variables, pairs)


def build_emsg(dataset: Dataset) -> Emsg:
    return emsg_from_table(mmd_table(dataset))


# -- the full algorithm --------------------------------------------------


class _Orienter:
    """Phase-two state: a growing DAG over the skeleton's adjacencies that
    never violates acyclicity, the in-degree cap or the temporal tiers."""

    def __init__(self, engine: _Engine, undecided: set[Pair]):
        self.engine = engine
        self.spec = engine.spec
        self.variables = engine.variables
        self.children: dict[str, list[str]] = {v: [] for v in self.variables}
        self.parents: dict[str, list[str]] = {v: [] for v in self.variables}
        self.undecided = undecided
        self.fams = {v: engine.family_bic(v, ()) for v in self.variables}

    def _creates_cycle(self, p: str, c: str) -> bool:
        seen = {c}
        frontier = [c]
        while frontier:
            x = frontier.pop()
            for y in self.children[x]:
                if y == p:
                    return True
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return False

    def is_valid(self, p: str, c: str) -> bool:
        if self._creates_cycle(p, c):
            return False
        m = self.engine.config.max_indegree
        if m is not None and len(self.parents[c]) + 1 > m:
            return False
        if self.spec.tiers is not None:
            from .knowledge import _temporal_violations
            post = {v: list(ps) for v, ps in self.parents.items()}
            post[c].append(p)
            if _temporal_violations(self.variables, post, self.spec.tiers,
                                    self.spec.tiers_strict):
                return False
        return True

    def orient(self, p: str, c: str):
        self.children[p].append(c)
        self.parents[c].append(p)
        self.undecided.discard(self.engine.spec.pair_key(p, c))
        self.fams[c] = self.engine.family_bic(c, self.parents[c])

    def score_with(self, p: str, c: str) -> float:
        trial = self.engine.family_bic(c, self.parents[c] + [p])
        return sum(trial if v == c else self.fams[v] for v in self.variables)

    def edges(self) -> list[Edge]:
        return [(p, c) for p in self.variables for c in self.children[p]]


def saiyanh(dataset: Dataset, spec: KnowledgeSpec | None = None,
            config: SearchConfig | None = None,
            indep_threshold: float = DEFAULT_INDEP_THRESHOLD,
            dep_threshold: float = DEFAULT_DEP_THRESHOLD) -> LearnResult:
    """Run the three-phase hybrid learner.

    Phase 1 scores every pair, pins required adjacencies to the score
    maximum and impossible ones to the minimum, and builds the skeleton.
    Phase 2 orients edges: knowledge directions first, collider detection
    from marginal-vs-conditional score classification, then up to two
    passes of score-based and directional-asymmetry orientation (earlier
    orientations are frozen). Edges whose both orientations are invalid
    are dropped and reported as warnings. Phase 3 runs tabu search from the
    oriented graph, never letting a move increase the number of weakly
    connected components, and finally connects any remaining fragments.
    """
    spec = spec if spec is not None else empty_spec(dataset.variables)
    config = config or SearchConfig()
    t0 = time.perf_counter()
    durations: dict[str, float] = {}
    warnings: list[str] = []

    engine = _Engine(dataset, spec, config, keep_component_count=True)
    index = engine.index

    # Phase 1: association scores and skeleton
    table = mmd_table(dataset)
    knowledge_arcs: list[Edge] = sorted(
        spec.directed_edges | (spec.initial_graph.edges if spec.initial_graph else frozenset()),
        key=lambda e: (index[e[0]], index[e[1]]))
    pinned_max = {table.key(p, c) for p, c in knowledge_arcs}
    pinned_max |= set(spec.undirected_edges)
    dead_pairs = set(spec.forbidden_edges)
    if spec.tiers is not None and spec.tiers_strict:
        for a, b in combinations(spec.variables, 2):
            ta, tb = spec.tiers.tier_of(a), spec.tiers.tier_of(b)
            if ta is not None and ta == tb:
                dead_pairs.add(table.key(a, b))
    for pair in pinned_max:
        table.set(*pair, 1.0)
    for pair in dead_pairs:
        table.set(*pair, 0.0)
    emsg = emsg_from_table(table)
    adjacencies = set(emsg.adjacencies) - dead_pairs
    durations["phase1"] = time.perf_counter() - t0

    # Phase 2: orientation
    t1 = time.perf_counter()
    orienter = _Orienter(engine, set(adjacencies))

    for p, c in knowledge_arcs:
        if spec.pair_key(p, c) not in orienter.undecided:
            continue
        if orienter.is_valid(p, c):
            orienter.orient(p, c)
        else:
            warnings.append(f"could not orient required arc {p} -> {c}")

    def classify(score: float) -> str:
        if score <= indep_threshold:
            return "independence"
        if score >= dep_threshold:
            return "dependence"
        return "insignificance"

    excluded = pinned_max | dead_pairs
    for a, b in combinations(spec.variables, 2):
        if table.key(a, b) in excluded or (a, b) in adjacencies:
            continue
        if classify(mmd(dataset, a, b)) != "independence":
            continue
        for c in sorted(set(spec.variables) - {a, b}, key=index.__getitem__):
            if (table.key(a, c) not in adjacencies
                    or table.key(b, c) not in adjacencies):
                continue
            if classify(mmd_conditional(dataset, a, b, c)) != "dependence":
                continue
            for p in (a, b):
                if spec.pair_key(p, c) in orienter.undecided and orienter.is_valid(p, c):
                    orienter.orient(p, c)

    def undecided_in_order() -> list[Pair]:
        return sorted(orienter.undecided,
                      key=lambda pr: (-table.get(*pr), index[pr[0]], index[pr[1]]))

    for _ in range(2):
        if not orienter.undecided:
            break
        # score-guided pass
        for a, b in undecided_in_order():
            options = [d for d in ((a, b), (b, a)) if orienter.is_valid(*d)]
            if len(options) == 1:
                orienter.orient(*options[0])
            elif len(options) == 2:
                s_ab = orienter.score_with(a, b)
                s_ba = orienter.score_with(b, a)
                if s_ab > s_ba:
                    orienter.orient(a, b)
                elif s_ba > s_ab:
                    orienter.orient(b, a)
        # directional-asymmetry pass for what is left
        for a, b in undecided_in_order():
            options = [d for d in ((a, b), (b, a)) if orienter.is_valid(*d)]
            if not options:
                continue
            if len(options) == 1:
                orienter.orient(*options[0])
                continue
            counts = family_counts(dataset, b, [a])
            mn_ab, mx_ab = _directional_components(counts)
            mn_ba, mx_ba = _directional_components(counts.T)
            if 0.5 * (mn_ba + mx_ba) > 0.5 * (mn_ab + mx_ab):
                orienter.orient(b, a)
            else:
                orienter.orient(a, b)

    for a, b in sorted(orienter.undecided, key=lambda pr: (index[pr[0]], index[pr[1]])):
        warnings.append(f"dropped unorientable edge {a} - {b}")
    oriented = Dag(spec.variables, orienter.edges())
    durations["phase2"] = time.perf_counter() - t1

    # Phase 3: tabu with the component guard, then connect leftovers
    t2 = time.perf_counter()
    dag, _, iterations = engine.tabu_from(oriented)
    dag = enforce_var_rel(dag, dataset, spec, engine=engine)
    durations["phase3"] = time.perf_counter() - t2

    return _finish(engine, dag, iterations, "saiyanh", t0,
                   warnings=tuple(warnings), phase_durations=durations)
