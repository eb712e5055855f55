"""Decomposable objective function: log-likelihood, weighted free-parameter
count and the BIC variant that lets chosen target variables trade a smaller
dimensionality penalty for more parents.

Everything is in log base 2. A graph's score is the sum of per-family
scores, where the family of a child v with parents P contributes

    ll(v|P)  -  (log2 N / 2) * ((s_v - 1) * prod(q_p for p in P)) / r_v

and r_v >= 1 is the child's target weight (1 for untargeted variables, so
r == 1 everywhere reproduces the standard BIC). Score comparisons are
strict: a tie never counts as an improvement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import Dag
from .model import Dataset, family_counts


class TargetWeights:
    """Per-variable penalty divisors r >= 1; unlisted variables get 1."""

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[str, float] | None = None):
        weights = dict(weights or {})
        for v, r in weights.items():
            if r < 1:
                raise ValueError(f"target weight for {v} must be >= 1, got {r}")
        self._weights = {v: float(r) for v, r in weights.items() if r != 1.0}

    def r(self, v: str) -> float:
        return self._weights.get(v, 1.0)

    @property
    def targets(self) -> dict[str, float]:
        return dict(self._weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TargetWeights):
            return NotImplemented
        return self._weights == other._weights

    def __repr__(self) -> str:
        return f"TargetWeights({self._weights})"


UNIT_WEIGHTS = TargetWeights()


@dataclass(frozen=True)
class FamilyScore:
    """Score components of one (child | parents) family."""

    child: str
    parents: tuple[str, ...]
    ll_component: float       # bits
    param_component: float    # weighted free-parameter count

    def bic(self, n: int) -> float:
        return self.ll_component - 0.5 * math.log2(n) * self.param_component


def _family_ll_and_params(dataset: Dataset, child: str, parents: tuple[str, ...]) -> tuple[float, float]:
    counts = family_counts(dataset, child, parents)
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log2(counts / totals)
    ll = float(np.sum(counts[counts > 0] * logs[counts > 0]))
    s = dataset.arity_of(child)
    q = math.prod(dataset.arity_of(p) for p in parents)
    return ll, float((s - 1) * q)


class ScoreCache:
    """Per-family score cache bound to one dataset.

    Keys are (child, sorted parent set, r_child); the underlying count pass
    is shared across different r values for the same family. Lookups and
    inserts are plain dict operations, atomic under the GIL; a duplicated
    concurrent computation of the same key is harmless because inserts are
    idempotent.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._raw: dict[tuple, tuple[float, float]] = {}
        self._entries: dict[tuple, FamilyScore] = {}
        self.count_passes = 0

    def _canonical(self, parents: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(parents, key=self.dataset.index_of))

    def family(self, child: str, parents: Iterable[str],
               weights: TargetWeights = UNIT_WEIGHTS) -> FamilyScore:
        parents = self._canonical(parents)
        r = weights.r(child)
        key = (child, parents, r)
        entry = self._entries.get(key)
        if entry is not None:
            return entry
        raw_key = (child, parents)
        raw = self._raw.get(raw_key)
        if raw is None:
            self.count_passes += 1
            raw = _family_ll_and_params(self.dataset, child, parents)
            self._raw[raw_key] = raw
        ll, raw_params = raw
        entry = FamilyScore(child, parents, ll, raw_params / r)
        self._entries[key] = entry
        return entry

    def family_bic(self, child: str, parents: Iterable[str],
                   weights: TargetWeights = UNIT_WEIGHTS) -> float:
        return self.family(child, parents, weights).bic(self.dataset.n)

    def graph_bic(self, dag: Dag, weights: TargetWeights = UNIT_WEIGHTS) -> float:
        return sum(self.family_bic(v, dag.parents(v), weights) for v in dag.variables)


def family_score_cached(cache: ScoreCache, dataset: Dataset, child: str,
                        parents: Iterable[str],
                        weights: TargetWeights = UNIT_WEIGHTS) -> FamilyScore:
    """Cached family score; identical to the uncached evaluation."""
    if cache.dataset is not dataset:
        raise ValueError("cache is bound to a different dataset")
    return cache.family(child, parents, weights)


def log_likelihood(dataset: Dataset, dag: Dag) -> float:
    """Maximised log-likelihood of the data under the graph, in bits.

    Sum over rows and variables of log2 P(v | parents) at the empirical
    (MLE) parameters, with 0 * log 0 taken as 0.
    """
    total = 0.0
    for v in dag.variables:
        ll, _ = _family_ll_and_params(dataset, v, dag.parents(v))
        total += ll
    return total


def free_parameters(dag: Dag, arities: Mapping[str, int] | Sequence[int],
                    weights: TargetWeights = UNIT_WEIGHTS) -> float:
    """Weighted count of independent CPT probabilities.

    Each variable contributes (s_v - 1) * prod(parent arities) / r_v. The
    count is structural: it does not depend on the data, only on the graph
    and the arities. Computed in doubles; exact for the integer-valued
    unweighted case.
    """
    if not isinstance(arities, Mapping):
        arities = dict(zip(dag.variables, arities))
    total = 0.0
    for v in dag.variables:
        q = math.prod(arities[p] for p in dag.parents(v))
        total += (arities[v] - 1) * q / weights.r(v)
    return total


def bic(dataset: Dataset, dag: Dag, weights: TargetWeights = UNIT_WEIGHTS) -> float:
    """LL minus (log2 N / 2) times the weighted free-parameter count.

    Higher is better. Decomposes exactly into per-family scores.
    """
    p = free_parameters(dag, dataset.arity_map(), weights)
    return log_likelihood(dataset, dag) - 0.5 * math.log2(dataset.n) * p
