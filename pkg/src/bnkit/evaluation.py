"""Graph-accuracy scoring of a learnt graph against a ground truth:
confusion accounting with a half penalty for reversed arcs, then F1, SHD
and the balanced scoring function, in DAG or CPDAG mode.

A reversal (right adjacency, wrong orientation) contributes 0.5 to each of
tp, fp and fn: half the penalty of a deletion plus half the penalty of an
addition, which makes F1 exactly 0.5 for one reversed arc against a
single-arc truth. The identities tp + fn = a and fp_pure + tn = i hold,
where fp_pure excludes the fractional reversal contribution and i counts
the unordered pairs absent from the truth.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateTruth, VariableSetMismatch
from .graph import Cpdag, Dag, to_cpdag


def missing_edges(v_count: int, a: int) -> int:
    """Edges absent from a graph with ``a`` arcs on ``v_count`` variables,
    relative to the completely connected graph."""
    limit = v_count * (v_count - 1) // 2
    if not 0 <= a <= limit:
        raise ValueError(f"edge count {a} outside [0, {limit}]")
    return limit - a


@dataclass(frozen=True)
class ConfusionCounts:
    """Fractional confusion quantities over unordered variable pairs.

    ``a`` is the number of adjacencies present in the truth, ``i`` the
    number absent. ``reversals`` counts adjacency-correct orientation
    mismatches, each already folded into tp/fp/fn at weight 0.5.
    """

    tp: float
    fp: float
    fn: float
    tn: float
    reversals: int
    a: int
    i: int

    @property
    def tp_pure(self) -> float:
        return self.tp - 0.5 * self.reversals

    @property
    def fp_pure(self) -> float:
        return self.fp - 0.5 * self.reversals

    @property
    def fn_pure(self) -> float:
        return self.fn - 0.5 * self.reversals


def _edge_views(graph: Dag | Cpdag):
    """(directed arc set, undirected pair set, variables)."""
    if isinstance(graph, Dag):
        return set(graph.edges), set(), graph.variables
    return set(graph.directed), set(graph.undirected), graph.variables


def confusion(learned: Dag | Cpdag, truth: Dag | Cpdag, mode: str = "dag") -> ConfusionCounts:
    """Compare two graphs pair by pair.

    In DAG mode directed adjacencies are compared as they stand. In CPDAG
    mode both graphs are first converted to their equivalence class, and a
    directed-vs-undirected mismatch on the same adjacency counts as a
    reversal. Exact match -> tp, reversal -> 0.5 tp + 0.5 fp + 0.5 fn,
    learnt-only adjacency -> fp, truth-only -> fn, shared absence -> tn.
    """
    if tuple(learned.variables) != tuple(truth.variables):
        raise VariableSetMismatch("graphs are defined over different variable sets")
    if mode not in ("dag", "cpdag"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "cpdag":
        if isinstance(learned, Dag):
            learned = to_cpdag(learned)
        if isinstance(truth, Dag):
            truth = to_cpdag(truth)

    l_dir, l_und, variables = _edge_views(learned)
    t_dir, t_und, _ = _edge_views(truth)
    index = {v: k for k, v in enumerate(variables)}

    def status(directed, undirected, x, y):
        if (x, y) in directed:
            return "fwd"
        if (y, x) in directed:
            return "rev"
        if (x, y) in undirected or (y, x) in undirected:
            return "und"
        return "none"

    tp = fp = fn = tn = 0.0
    reversals = 0
    a = 0
    names = list(variables)
    for k, x in enumerate(names):
        for y in names[k + 1:]:
            t = status(t_dir, t_und, x, y)
            l = status(l_dir, l_und, x, y)
            if t != "none":
                a += 1
            if t == "none" and l == "none":
                tn += 1.0
            elif t == "none":
                fp += 1.0
            elif l == "none":
                fn += 1.0
            elif t == l:
                tp += 1.0
            else:
                tp += 0.5
                fp += 0.5
                fn += 0.5
                reversals += 1
    i = missing_edges(len(names), a)
    return ConfusionCounts(tp, fp, fn, tn, reversals, a, i)


def f1(counts: ConfusionCounts) -> float:
    denom = 2 * counts.tp + counts.fp + counts.fn
    if denom == 0:
        return 0.0
    return 2 * counts.tp / denom


def shd(counts: ConfusionCounts) -> float:
    """Adjacency errors plus half a point per reversal (fractional)."""
    return counts.fp_pure + counts.fn_pure + 0.5 * counts.reversals


def bsf(counts: ConfusionCounts) -> float:
    """Balanced score: 1 for the truth, 0 for an empty or complete graph,
    -1 for the complement of the truth."""
    if counts.a == 0 or counts.i == 0:
        raise DegenerateTruth("truth graph has no present or no absent edges")
    return 0.5 * (counts.tp / counts.a + counts.tn / counts.i
                  - counts.fp / counts.i - counts.fn / counts.a)


def scores(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(f1, shd, bsf); raises DegenerateTruth when bsf is undefined."""
    return f1(counts), shd(counts), bsf(counts)


@dataclass(frozen=True)
class EvalReport:
    mode: str
    counts: ConfusionCounts
    f1: float
    shd: float
    bsf: float

    def as_dict(self) -> dict:
        c = self.counts
        return {
            "mode": self.mode,
            "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
            "reversals": c.reversals,
            "f1": self.f1, "shd": self.shd, "bsf": self.bsf,
        }


def evaluate(learned: Dag | Cpdag, truth: Dag | Cpdag, mode: str = "dag") -> EvalReport:
    counts = confusion(learned, truth, mode)
    return EvalReport(mode, counts, f1(counts), shd(counts), bsf(counts))
