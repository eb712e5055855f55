"""Small hand-built ground-truth networks for tests and demos, plus an
exhaustive search oracle.

Every fixture is hand-assigned: structures echo classic benchmark shapes
(an 8-node diagnosis net, a 9-node match-outcome net) but the CPTs are
ours. The 3-node fixtures sit comfortably inside the exhaustive-oracle
range; the 8- and 9-node ones are for parameter-count and layering checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .errors import TooManyVariables
from .graph import Dag
from .knowledge import KnowledgeSpec, empty_spec, graph_satisfies
from .model import DiscreteBn
from .scoring import ScoreCache, TargetWeights


@dataclass(frozen=True)
class Fixture:
    name: str
    bn: DiscreteBn
    provenance: str


def _binary_states(names):
    return {v: ("0", "1") for v in names}


def chain3() -> Fixture:
    """A -> B -> C, strong links."""
    dag = Dag(("A", "B", "C"), [("A", "B"), ("B", "C")])
    cpts = {
        "A": [[0.35, 0.65]],
        "B": [[0.85, 0.15], [0.15, 0.85]],
        "C": [[0.80, 0.20], [0.20, 0.80]],
    }
    return Fixture("chain3", DiscreteBn(dag, _binary_states(dag.variables), cpts), "hand-built")


def collider3() -> Fixture:
    """A -> C <- B with independent causes and a strong, monotone gate."""
    dag = Dag(("A", "B", "C"), [("A", "C"), ("B", "C")])
    cpts = {
        "A": [[0.45, 0.55]],
        "B": [[0.55, 0.45]],
        # rows: (A,B) = 00, 01, 10, 11
        "C": [[0.92, 0.08], [0.30, 0.70], [0.25, 0.75], [0.05, 0.95]],
    }
    return Fixture("collider3", DiscreteBn(dag, _binary_states(dag.variables), cpts), "hand-built")


def mixed5() -> Fixture:
    """Five nodes around a ternary hub: A -> B, A -> C, C -> D, C -> E.

    A tree, so the whole equivalence class is reversible and recovery is
    judged on the skeleton.
    """
    dag = Dag(("A", "B", "C", "D", "E"),
              [("A", "B"), ("A", "C"), ("C", "D"), ("C", "E")])
    states = _binary_states(("A", "B", "D", "E"))
    states["C"] = ("0", "1", "2")
    cpts = {
        "A": [[0.40, 0.60]],
        "B": [[0.80, 0.20], [0.15, 0.85]],
        # rows: A = 0, 1
        "C": [
            [0.70, 0.20, 0.10],
            [0.10, 0.25, 0.65],
        ],
        # rows: C = 0, 1, 2
        "D": [[0.90, 0.10], [0.45, 0.55], [0.08, 0.92]],
        "E": [[0.12, 0.88], [0.55, 0.45], [0.85, 0.15]],
    }
    return Fixture("mixed5", DiscreteBn(dag, states, cpts), "hand-built")


def asia8() -> Fixture:
    """Eight binary nodes shaped like the classic chest-clinic net; CPTs are
    hand-assigned. All-binary with these in-degrees the unweighted
    free-parameter count is 18."""
    dag = Dag(
        ("asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"),
        [
            ("asia", "tub"), ("smoke", "lung"), ("smoke", "bronc"),
            ("tub", "either"), ("lung", "either"),
            ("either", "xray"), ("bronc", "dysp"), ("either", "dysp"),
        ],
    )
    cpts = {
        "asia": [[0.95, 0.05]],
        "smoke": [[0.45, 0.55]],
        "tub": [[0.97, 0.03], [0.70, 0.30]],
        "lung": [[0.92, 0.08], [0.72, 0.28]],
        "bronc": [[0.75, 0.25], [0.35, 0.65]],
        # rows: (tub, lung) = 00, 01, 10, 11
        "either": [[0.98, 0.02], [0.05, 0.95], [0.05, 0.95], [0.02, 0.98]],
        "xray": [[0.93, 0.07], [0.10, 0.90]],
        # rows: (bronc, either) = 00, 01, 10, 11
        "dysp": [[0.90, 0.10], [0.25, 0.75], [0.20, 0.80], [0.10, 0.90]],
    }
    return Fixture("asia8", DiscreteBn(dag, _binary_states(dag.variables), cpts),
                   "structure-from-benchmark, hand CPTs")


def sports9() -> Fixture:
    """Nine binary nodes, fifteen arcs, max in-degree two, six layers; used
    for longest-path layering checks."""
    names = ("fitness", "form", "attack", "defence", "possession",
             "pressure", "chances", "saves", "result")
    dag = Dag(names, [
        ("fitness", "form"),
        ("fitness", "attack"), ("form", "attack"),
        ("fitness", "defence"), ("form", "defence"),
        ("form", "possession"), ("attack", "possession"),
        ("attack", "pressure"), ("defence", "pressure"),
        ("possession", "chances"), ("defence", "chances"),
        ("possession", "saves"), ("pressure", "saves"),
        ("chances", "result"), ("saves", "result"),
    ])
    root = [[0.50, 0.50]]
    one = [[0.80, 0.20], [0.20, 0.80]]
    two = [[0.88, 0.12], [0.62, 0.38], [0.35, 0.65], [0.10, 0.90]]
    cpts = {
        "fitness": root,
        "form": one,
        "attack": two, "defence": two,
        "possession": two, "pressure": two,
        "chances": two, "saves": two, "result": two,
    }
    return Fixture("sports9", DiscreteBn(dag, _binary_states(names), cpts),
                   "structure-from-benchmark shape, hand CPTs")


FIXTURES = {f().name: f for f in (chain3, collider3, mixed5, asia8, sports9)}


def get_fixture(name: str) -> Fixture:
    return FIXTURES[name]()


# -- exhaustive oracle ---------------------------------------------------


def all_dags(variables) -> list[Dag]:
    """Every DAG over the given variables, in a fixed enumeration order.

    Each unordered pair independently takes one of {absent, forward,
    backward}; cyclic assignments are filtered out. Limited to five
    variables (29,281 DAGs).
    """
    variables = tuple(variables)
    if len(variables) > 5:
        raise TooManyVariables(f"{len(variables)} variables; the limit is 5")
    pairs = list(combinations(variables, 2))
    out = []
    for assignment in product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (x, y), state in zip(pairs, assignment):
            if state == 1:
                edges.append((x, y))
            elif state == 2:
                edges.append((y, x))
        if not _acyclic(variables, edges):
            continue
        out.append(Dag(variables, edges))
    return out


def _acyclic(variables, edges) -> bool:
    indeg = {v: 0 for v in variables}
    children = {v: [] for v in variables}
    for p, c in edges:
        indeg[c] += 1
        children[p].append(c)
    ready = [v for v in variables if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen == len(variables)


def exhaustive_best_dag(dataset, spec: KnowledgeSpec | None = None,
                        weights: TargetWeights | None = None) -> tuple[Dag, float]:
    """Globally best-scoring DAG among all DAGs satisfying the spec.

    Enumerates every DAG over the dataset's variables (at most five), keeps
    those with no constraint violations and returns the score maximiser;
    ties go to the earliest graph in enumeration order.
    """
    spec = spec if spec is not None else empty_spec(dataset.variables)
    weights = weights or spec.target_weights
    cache = ScoreCache(dataset)
    best: tuple[Dag, float] | None = None
    for dag in all_dags(dataset.variables):
        if graph_satisfies(dag, spec):
            continue
        score = cache.graph_bic(dag, weights)
        if best is None or score > best[1]:
            best = (dag, score)
    if best is None:
        raise ValueError("no DAG satisfies the spec")
    return best
