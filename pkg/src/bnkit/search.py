"""Score-based structure search: greedy hill climbing, tabu escapes from
local optima, and model-averaged hill climbing over pruned parent sets —
plus the connectivity and decision/utility repair phases shared by every
learner.

Determinism contract: identical (dataset, spec, config) always yields the
identical graph. Neighbor evaluation may run in a thread pool, but the
selected move equals the sequential tie-broken choice: ties break
lexicographically by (move kind add < remove < reverse, parent index,
child index). Candidate scores are recomputed as the per-family sum in
variable order, so the incumbent score is a pure function of the graph and
the search cannot revisit a state.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .errors import NoAdmissibleConnector, SearchTimeout
from .graph import Dag, Edge, weakly_connected_components
from .knowledge import (
    BdnGraph,
    KnowledgeSpec,
    Move,
    apply_move,
    empty_spec,
    move_is_admissible,
    seed_graph,
    to_bdn,
)
from .model import Dataset
from .scoring import ScoreCache, free_parameters


@dataclass(frozen=True)
class SearchConfig:
    """Knobs shared by all learners.

    ``max_indegree`` of None means unlimited. ``tabu_iteration_cap`` of
    None defaults to V(V-1) escape attempts. ``timeout_secs`` is a
    cooperative wall-clock budget checked at iteration boundaries.
    """

    max_indegree: int | None = None
    mahc_prune_indegree: int = 3
    tabu_iteration_cap: int | None = None
    seed: int = 0
    parallel_neighbors: bool = False
    timeout_secs: float | None = None

    def __post_init__(self):
        if self.max_indegree is not None and self.max_indegree < 1:
            raise ValueError("max_indegree must be >= 1")
        if self.mahc_prune_indegree < 1:
            raise ValueError("mahc_prune_indegree must be >= 1")


@dataclass(frozen=True)
class LearnResult:
    """Outcome of one learning run. ``score`` is the final graph's
    re-evaluated objective value (within 1e-6 of a fresh evaluation)."""

    dag: Dag
    score: float
    iterations: int
    arcs_learnt: int
    free_parameters: float
    runtime_seconds: float
    algorithm: str
    bdn: BdnGraph | None = None
    warnings: tuple[str, ...] = ()
    phase_durations: dict[str, float] | None = None


class _Engine:
    """Shared state for one learning run: dataset, constraints, score cache
    and the admissibility predicate."""

    def __init__(self, dataset: Dataset, spec: KnowledgeSpec, config: SearchConfig,
                 extra_forbidden_arcs: frozenset[Edge] = frozenset(),
                 keep_component_count: bool = False):
        if tuple(spec.variables) != tuple(dataset.variables):
            raise ValueError("spec and dataset are defined over different variables")
        self.dataset = dataset
        self.spec = spec
        self.config = config
        self.cache = ScoreCache(dataset)
        self.weights = spec.target_weights
        self.variables = dataset.variables
        self.index = {v: i for i, v in enumerate(dataset.variables)}
        self.extra_forbidden_arcs = extra_forbidden_arcs
        self.keep_component_count = keep_component_count
        self._deadline = (time.monotonic() + config.timeout_secs
                          if config.timeout_secs is not None else None)

    def check_deadline(self):
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise SearchTimeout(f"exceeded {self.config.timeout_secs} s")

    # -- scoring -------------------------------------------------------

    def family_bic(self, child: str, parents: Iterable[str]) -> float:
        return self.cache.family_bic(child, parents, self.weights)

    def graph_fams(self, dag: Dag) -> dict[str, float]:
        return {v: self.family_bic(v, dag.parents(v)) for v in self.variables}

    def total(self, fams: dict[str, float]) -> float:
        return sum(fams[v] for v in self.variables)

    def _changed_fams(self, dag: Dag, move: Move) -> dict[str, float]:
        p, c = move.parent, move.child
        if move.kind == "add":
            return {c: self.family_bic(c, dag.parents(c) + (p,))}
        if move.kind == "remove":
            return {c: self.family_bic(c, tuple(x for x in dag.parents(c) if x != p))}
        return {
            c: self.family_bic(c, tuple(x for x in dag.parents(c) if x != p)),
            p: self.family_bic(p, dag.parents(p) + (c,)),
        }

    def candidate_score(self, fams: dict[str, float], changed: dict[str, float]) -> float:
        return sum(changed.get(v, fams[v]) for v in self.variables)

    # -- neighbourhood -------------------------------------------------

    def admissible(self, dag: Dag, move: Move) -> bool:
        if not move_is_admissible(dag, move, self.spec, self.config.max_indegree,
                                  self.extra_forbidden_arcs):
            return False
        if self.keep_component_count and move.kind == "remove":
            return _removal_keeps_component(dag, move.parent, move.child)
        return True

    def candidate_moves(self, dag: Dag) -> list[Move]:
        moves = []
        for p in self.variables:
            for c in self.variables:
                if p != c and not dag.adjacent(p, c):
                    moves.append(Move("add", p, c))
        edges = dag.sorted_edges()
        moves.extend(Move("remove", p, c) for p, c in edges)
        moves.extend(Move("reverse", p, c) for p, c in edges)
        return moves

    def scored_neighbors(self, dag: Dag, fams: dict[str, float]) -> list[tuple[Move, float]]:
        """Admissible moves with their post-move graph scores, in canonical
        order. Optionally evaluated in a thread pool; the order (and hence
        every tie-break) is unchanged."""
        moves = self.candidate_moves(dag)

        def evaluate(move: Move):
            if not self.admissible(dag, move):
                return None
            return move, self.candidate_score(fams, self._changed_fams(dag, move))

        if self.config.parallel_neighbors and len(moves) > 1:
            with ThreadPoolExecutor(max_workers=4) as pool:
                results = list(pool.map(evaluate, moves))
        else:
            results = [evaluate(m) for m in moves]
        return [r for r in results if r is not None]

    @staticmethod
    def best_of(scored: list[tuple[Move, float]]) -> tuple[Move, float] | None:
        best = None
        for move, score in scored:
            if best is None or score > best[1]:
                best = (move, score)
        return best

    # -- core loops ----------------------------------------------------

    def hill_climb_from(self, dag: Dag) -> tuple[Dag, dict[str, float], float, int]:
        fams = self.graph_fams(dag)
        score = self.total(fams)
        iterations = 0
        while True:
            self.check_deadline()
            best = self.best_of(self.scored_neighbors(dag, fams))
            if best is None or best[1] <= score:
                return dag, fams, score, iterations
            move, _ = best
            dag = apply_move(dag, move)
            for v in ({move.child, move.parent} if move.kind == "reverse" else {move.child}):
                fams[v] = self.family_bic(v, dag.parents(v))
            score = self.total(fams)
            iterations += 1

    def tabu_from(self, start: Dag) -> tuple[Dag, float, int]:
        dag, fams, score, iterations = self.hill_climb_from(start)
        best_dag, best_fams, best_score = dag, fams, score
        v = len(self.variables)
        cap = self.config.tabu_iteration_cap
        if cap is None:
            cap = v * (v - 1)
        blacklist: set[frozenset[Edge]] = set()
        for _ in range(cap):
            self.check_deadline()
            scored = self.scored_neighbors(best_dag, best_fams)
            escape = None
            for move, cand in scored:
                post = _post_edge_set(best_dag, move)
                if post in blacklist:
                    continue
                if escape is None or cand > escape[1]:
                    escape = (move, cand)
            if escape is None:
                break
            escape_dag = apply_move(best_dag, escape[0])
            dag, fams, score, hc_iters = self.hill_climb_from(escape_dag)
            iterations += hc_iters + 1
            if score > best_score:
                best_dag, best_fams, best_score = dag, fams, score
                blacklist.clear()
            else:
                blacklist.add(frozenset(escape_dag.edges))
        return best_dag, best_score, iterations


def _post_edge_set(dag: Dag, move: Move) -> frozenset[Edge]:
    edges = set(dag.edges)
    if move.kind == "add":
        edges.add((move.parent, move.child))
    elif move.kind == "remove":
        edges.discard((move.parent, move.child))
    else:
        edges.discard((move.parent, move.child))
        edges.add((move.child, move.parent))
    return frozenset(edges)


def _removal_keeps_component(dag: Dag, u: str, v: str) -> bool:
    """Would u and v still be weakly connected after dropping arc u -> v?
    Antiparallel arcs cannot exist, so the removed arc is the only direct
    u-v adjacency and any u-v hop can be skipped outright."""
    seen = {u}
    frontier = [u]
    while frontier:
        x = frontier.pop()
        for y in dag.parents(x) + dag.children(x):
            if {x, y} == {u, v}:
                continue
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return v in seen


# -- repair phases -----------------------------------------------------


def _best_connector(engine: _Engine, dag: Dag, fams: dict[str, float],
                    candidates: list[Move]) -> Move:
    best = None
    for move in candidates:
        if not engine.admissible(dag, move):
            continue
        cand = engine.candidate_score(fams, engine._changed_fams(dag, move))
        if best is None or cand > best[1]:
            best = (move, cand)
    if best is None:
        raise NoAdmissibleConnector("no admissible arc can be added")
    return best[0]


def enforce_var_rel(dag: Dag, dataset: Dataset, spec: KnowledgeSpec,
                    config: SearchConfig | None = None,
                    engine: _Engine | None = None) -> Dag:
    """Connect the graph: while more than one weakly connected component
    remains, add the admissible arc joining two components whose score loss
    is smallest."""
    engine = engine or _Engine(dataset, spec, config or SearchConfig())
    fams = engine.graph_fams(dag)
    while True:
        blocks = weakly_connected_components(dag)
        if len(blocks) <= 1:
            return dag
        block_of = {v: i for i, block in enumerate(blocks) for v in block}
        candidates = [
            Move("add", p, c)
            for p in engine.variables
            for c in engine.variables
            if p != c and block_of[p] != block_of[c]
        ]
        move = _best_connector(engine, dag, fams, candidates)
        dag = apply_move(dag, move)
        fams[move.child] = engine.family_bic(move.child, dag.parents(move.child))


def enforce_str_bdn(dag: Dag, dataset: Dataset, spec: KnowledgeSpec,
                    config: SearchConfig | None = None,
                    engine: _Engine | None = None) -> Dag:
    """While a decision lacks a child or a utility lacks a parent, add the
    deficiency-fixing arc (a child arc for the decision, a parent arc for
    the utility) whose score loss is smallest."""
    if spec.bdn is None:
        return dag
    engine = engine or _Engine(dataset, spec, config or SearchConfig())
    fams = engine.graph_fams(dag)
    while True:
        candidates: list[Move] = []
        for d in sorted(spec.bdn.decisions, key=engine.index.__getitem__):
            if not dag.children(d):
                candidates.extend(Move("add", d, x) for x in engine.variables if x != d)
        for u in sorted(spec.bdn.utilities, key=engine.index.__getitem__):
            if not dag.parents(u):
                candidates.extend(Move("add", x, u) for x in engine.variables if x != u)
        if not candidates:
            return dag
        move = _best_connector(engine, dag, fams, candidates)
        dag = apply_move(dag, move)
        fams[move.child] = engine.family_bic(move.child, dag.parents(move.child))


def _finish(engine: _Engine, dag: Dag, iterations: int, algorithm: str,
            t0: float, warnings: tuple[str, ...] = (),
            phase_durations: dict[str, float] | None = None) -> LearnResult:
    spec = engine.spec
    if spec.variables_relevant:
        dag = enforce_var_rel(dag, engine.dataset, spec, engine=engine)
    if spec.bdn is not None and spec.bdn_strict:
        dag = enforce_str_bdn(dag, engine.dataset, spec, engine=engine)
    score = engine.cache.graph_bic(dag, engine.weights)
    bdn = to_bdn(dag, spec.bdn) if spec.bdn is not None else None
    return LearnResult(
        dag=dag,
        score=score,
        iterations=iterations,
        arcs_learnt=dag.edge_count,
        free_parameters=free_parameters(dag, engine.dataset.arity_map(), engine.weights),
        runtime_seconds=time.perf_counter() - t0,
        algorithm=algorithm,
        bdn=bdn,
        warnings=warnings,
        phase_durations=phase_durations,
    )


def hill_climb(dataset: Dataset, spec: KnowledgeSpec | None = None,
               config: SearchConfig | None = None) -> LearnResult:
    """Greedy ascent: from the constrained starting graph, repeatedly apply
    the admissible single-arc change that most increases the score, until
    no change strictly improves it."""
    spec = spec if spec is not None else empty_spec(dataset.variables)
    config = config or SearchConfig()
    t0 = time.perf_counter()
    engine = _Engine(dataset, spec, config)
    start = seed_graph(spec, config.seed, config.max_indegree)
    dag, _, _, iterations = engine.hill_climb_from(start)
    return _finish(engine, dag, iterations, "hc", t0)


def tabu(dataset: Dataset, spec: KnowledgeSpec | None = None,
         config: SearchConfig | None = None) -> LearnResult:
    """Hill climbing plus bounded escapes: take the least-worsening
    admissible neighbor of the incumbent, climb from it, keep the result if
    it beats the incumbent and otherwise blacklist that neighbor. The
    blacklist clears whenever the incumbent improves, so its scope is the
    current incumbent. Never returns a worse graph than hill_climb."""
    spec = spec if spec is not None else empty_spec(dataset.variables)
    config = config or SearchConfig()
    t0 = time.perf_counter()
    engine = _Engine(dataset, spec, config)
    start = seed_graph(spec, config.seed, config.max_indegree)
    dag, _, iterations = engine.tabu_from(start)
    return _finish(engine, dag, iterations, "tabu", t0)


# -- model-averaged hill climbing ---------------------------------------


def _mahc_allowed_parents(spec: KnowledgeSpec, child: str) -> list[str]:
    out = []
    for u in spec.variables:
        if u == child:
            continue
        if spec.pair_key(u, child) in spec.forbidden_edges:
            continue
        if (child, u) in spec.directed_edges:
            continue
        if spec.tiers is not None:
            tu, tc = spec.tiers.tier_of(u), spec.tiers.tier_of(child)
            if tu is not None and tc is not None:
                if tu > tc or (spec.tiers_strict and tu == tc):
                    continue
        out.append(u)
    return out


def prune_parent_candidates(engine: _Engine, prune_indegree: int) -> frozenset[Edge]:
    """Phase-one pruning: per child, rank every candidate parent set up to
    the pruning in-degree by its family score and retain, at each set size,
    only the best-scoring sets — and only when they strictly beat every
    smaller size's best. An arc u -> v is pruned off when u appears in no
    retained set of v; pruned arcs are treated as forbidden for the rest of
    the run. Required parents are never pruned."""
    from itertools import combinations

    spec = engine.spec
    pruned: set[Edge] = set()
    for child in engine.variables:
        required = frozenset(u for u, c in spec.directed_edges if c == child)
        allowed = _mahc_allowed_parents(spec, child)
        optional = [u for u in allowed if u not in required]
        surviving: set[str] = set(required)
        best_so_far = None
        for k in range(0, max(0, prune_indegree - len(required)) + 1):
            if len(required) + k > prune_indegree:
                break
            tier = [
                (engine.family_bic(child, required | frozenset(combo)), frozenset(combo))
                for combo in combinations(optional, k)
            ]
            if not tier:
                continue
            best_k = max(score for score, _ in tier)
            if best_so_far is not None and best_k <= best_so_far:
                continue
            best_so_far = best_k
            for score, combo in tier:
                if score == best_k:
                    surviving |= combo
        for u in allowed:
            if u not in surviving:
                pruned.add((u, child))
    return frozenset(pruned)


def mahc(dataset: Dataset, spec: KnowledgeSpec | None = None,
         config: SearchConfig | None = None) -> LearnResult:
    """Model-averaged hill climbing: after pruning candidate parent sets,
    each candidate neighbor is scored by the mean objective value over the
    neighbor itself and all of its own admissible neighbors, and the search
    moves while that average improves."""
    spec = spec if spec is not None else empty_spec(dataset.variables)
    config = config or SearchConfig()
    t0 = time.perf_counter()

    seed_engine = _Engine(dataset, spec, config)
    pruned = prune_parent_candidates(seed_engine, config.mahc_prune_indegree)
    engine = _Engine(dataset, spec, config, extra_forbidden_arcs=pruned)
    engine.cache = seed_engine.cache  # family scores carry over unchanged

    dag = seed_graph(spec, config.seed, config.max_indegree)
    fams = engine.graph_fams(dag)

    def averaged(d: Dag, d_fams: dict[str, float]) -> float:
        # Mean over the graph and the admissible neighbors that improve on
        # it. Averaging over the whole neighborhood instead would reward
        # graphs with redundant arcs (their neighborhoods cushion arc
        # removals), pulling the optimum away from the score's optimum.
        own = engine.total(d_fams)
        values = [own]
        for _, cand in engine.scored_neighbors(d, d_fams):
            if cand > own:
                values.append(cand)
        return sum(values) / len(values)

    s_max = averaged(dag, fams)
    iterations = 0
    while True:
        engine.check_deadline()
        best = None
        for move, _ in engine.scored_neighbors(dag, fams):
            n_dag = apply_move(dag, move)
            n_fams = dict(fams)
            for v in ({move.child, move.parent} if move.kind == "reverse" else {move.child}):
                n_fams[v] = engine.family_bic(v, n_dag.parents(v))
            s_n = averaged(n_dag, n_fams)
            if best is None or s_n > best[0]:
                best = (s_n, move, n_dag, n_fams)
        if best is None or best[0] <= s_max:
            break
        s_max, _, dag, fams = best
        iterations += 1
    return _finish(engine, dag, iterations, "mahc", t0)
