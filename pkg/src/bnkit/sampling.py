"""Simulated knowledge inputs drawn from a ground-truth graph.

Edge-flavoured approaches sample from a seeded permutation of the true
arcs; the sample at a lower rate is always a prefix of the sample at a
higher rate, and the same permutation serves the directed, undirected and
initial-graph approaches so identical seeds pick identical edges.
Forbidden-edge constraints use the same counts but draw from the pairs
absent in the truth, so the truth always satisfies what was sampled from
it. Counts are round-half-up of rate times population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooFewVariables
from .graph import Dag, Edge, Pair, TemporalTiers, layer_by_longest_path
from .knowledge import BdnAnnotation, KnowledgeSpec
from .scoring import TargetWeights

EDGE_RATES = (0.05, 0.10, 0.20, 0.50)
TIER_RATES = (0.05, 0.10, 0.20, 0.50)
INITIAL_GRAPH_RATES = (0.50, 1.00)

SAMPLABLE_APPROACHES = ("dir-edg", "und-edg", "for-edg", "rel-tem", "str-tem",
                        "ini-gra", "var-rel")


@dataclass(frozen=True)
class SampleRequest:
    truth: Dag
    approach: str
    rate: float | None
    seed: int

    def __post_init__(self):
        legal = legal_rates(self.approach)
        if self.rate not in legal:
            raise ValueError(
                f"rate {self.rate} is not applicable to {self.approach}; "
                f"expected one of {legal}")


def legal_rates(approach: str) -> tuple:
    if approach in ("dir-edg", "und-edg", "for-edg"):
        return EDGE_RATES
    if approach in ("rel-tem", "str-tem"):
        return TIER_RATES
    if approach == "ini-gra":
        return INITIAL_GRAPH_RATES
    if approach in ("var-rel", "tar-var", "rel-bdn", "str-bdn"):
        return (None,)
    raise ValueError(f"unknown approach {approach!r}")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _permuted(items: list, seed: int) -> list:
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(items))
    return [items[k] for k in order]


def sample_edge_constraints(truth: Dag, rate: float, seed: int) -> list[Edge]:
    """First round(rate * a) arcs of the seeded permutation of the true
    arcs; nested across rates by construction. Serves the directed and
    undirected approaches (the latter drops direction) and the half-rate
    initial graph."""
    if not 0 < rate <= 0.5:
        raise ValueError("edge constraints are sampled at rates up to 50%")
    count = round_half_up(rate * truth.edge_count)
    return _permuted(truth.sorted_edges(), seed)[:count]


def sample_forbidden_constraints(truth: Dag, rate: float, seed: int) -> list[Pair]:
    """Same counts as the directed approach, but drawn from the adjacencies
    absent in the truth, so the truth itself satisfies the constraints."""
    if not 0 < rate <= 0.5:
        raise ValueError("edge constraints are sampled at rates up to 50%")
    count = round_half_up(rate * truth.edge_count)
    names = truth.variables
    absent = [
        (names[j], names[k])
        for j in range(len(names))
        for k in range(j + 1, len(names))
        if not truth.adjacent(names[j], names[k])
    ]
    return _permuted(absent, seed)[:count]


def sample_tiers(truth: Dag, rate: float, seed: int) -> TemporalTiers:
    """Assign a seeded, nested selection of round(rate * |V|) variables to
    the tiers derived from the truth's longest-path layering; empty tiers
    are dropped with the order preserved."""
    count = round_half_up(rate * len(truth.variables))
    if count < 2:
        raise TooFewVariables(
            f"temporal constraints need at least two variables; rate {rate} "
            f"selects {count} of {len(truth.variables)} — smaller networks "
            "cannot be tested at lower rates")
    selected = set(_permuted(list(truth.variables), seed)[:count])
    layering = layer_by_longest_path(truth)
    tiers = [tier & selected for tier in layering.tiers]
    return TemporalTiers([t for t in tiers if t])


def sample_initial_graph(truth: Dag, rate: float, seed: int) -> Dag:
    """The truth itself at rate 1.0; at rate 0.5 the graph whose arcs are
    exactly the 50% directed-edge sample."""
    if rate == 1.0:
        return truth
    if rate == 0.5:
        return Dag(truth.variables, sample_edge_constraints(truth, 0.5, seed))
    raise ValueError("initial graphs are sampled at rates 0.5 or 1.0 only")


def build_spec(truth: Dag, approach: str, rate: float | None, seed: int,
               target_weights: TargetWeights | None = None,
               bdn: BdnAnnotation | None = None) -> KnowledgeSpec:
    """KnowledgeSpec for one (approach, rate) cell, sampled from the truth.

    The flag-only approaches take no sampled constraints: connectedness and
    the strict decision/utility approach switch behaviour on, the target
    and decision/utility inputs come from the caller.
    """
    SampleRequest(truth, approach, rate, seed)
    variables = truth.variables
    weights = target_weights or TargetWeights()
    if approach == "dir-edg":
        return KnowledgeSpec(variables, directed_edges=sample_edge_constraints(truth, rate, seed))
    if approach == "und-edg":
        return KnowledgeSpec(variables, undirected_edges=sample_edge_constraints(truth, rate, seed))
    if approach == "for-edg":
        return KnowledgeSpec(variables, forbidden_edges=sample_forbidden_constraints(truth, rate, seed))
    if approach in ("rel-tem", "str-tem"):
        return KnowledgeSpec(variables, tiers=sample_tiers(truth, rate, seed),
                             tiers_strict=approach == "str-tem")
    if approach == "ini-gra":
        return KnowledgeSpec(variables, initial_graph=sample_initial_graph(truth, rate, seed))
    if approach == "var-rel":
        return KnowledgeSpec(variables, variables_relevant=True)
    if approach == "tar-var":
        return KnowledgeSpec(variables, target_weights=weights)
    if approach in ("rel-bdn", "str-bdn"):
        return KnowledgeSpec(variables, bdn=bdn or BdnAnnotation(frozenset(), frozenset()),
                             bdn_strict=approach == "str-bdn")
    raise ValueError(f"unknown approach {approach!r}")
