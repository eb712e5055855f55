"""Discrete Bayesian network model: CPT storage, maximum-likelihood fitting
and forward (ancestral) sampling of synthetic data.

CPT layout: for a variable with parents (p1, .., pk) listed in canonical
variable order, the table has one row per parent configuration in
mixed-radix order with p1 as the most significant digit, and one column per
child state. The random source is numpy's PCG64 (``default_rng``), fixed
per release; identical seeds give identical datasets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ArityMismatch
from .graph import Dag

_ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Dataset:
    """Complete discrete data matrix with per-variable arities.

    ``data`` holds state indices, shape (N, |variables|). ``state_labels``
    maps each index back to its CSV label; defaults to the index digits.
    """

    variables: tuple[str, ...]
    arities: tuple[int, ...]
    data: np.ndarray
    state_labels: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[1] != len(self.variables):
            raise ArityMismatch("data shape does not match variable list")
        if len(self.arities) != len(self.variables):
            raise ArityMismatch("arities do not match variable list")
        for j, arity in enumerate(self.arities):
            if data.shape[0] and (data[:, j].min() < 0 or data[:, j].max() >= arity):
                raise ArityMismatch(f"state index out of range in column {self.variables[j]}")
        object.__setattr__(self, "data", data)
        if not self.state_labels:
            labels = tuple(tuple(str(s) for s in range(a)) for a in self.arities)
            object.__setattr__(self, "state_labels", labels)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.index_of(name)]

    def index_of(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ArityMismatch(f"no column named {name}") from None

    def arity_of(self, name: str) -> int:
        return self.arities[self.index_of(name)]

    def arity_map(self) -> dict[str, int]:
        return dict(zip(self.variables, self.arities))


@dataclass(frozen=True)
class DiscreteBn:
    """A Dag plus one conditional probability table per variable.

    ``states`` fixes each variable's state labels (arity = label count);
    ``cpts`` maps a variable to an array of shape (q, s) where q is the
    product of its parents' arities and s its own arity. Every row must sum
    to one within 1e-9.
    """

    dag: Dag
    states: Mapping[str, tuple[str, ...]]
    cpts: Mapping[str, np.ndarray]

    def __post_init__(self):
        states = {v: tuple(self.states[v]) for v in self.dag.variables}
        cpts = {}
        for v in self.dag.variables:
            s = len(states[v])
            if s < 2:
                raise ArityMismatch(f"{v}: every variable needs at least two states")
            q = 1
            for p in self.dag.parents(v):
                q *= len(states[p])
            table = np.asarray(self.cpts[v], dtype=float)
            if table.shape != (q, s):
                raise ArityMismatch(f"{v}: CPT shape {table.shape} != ({q}, {s})")
            if not np.allclose(table.sum(axis=1), 1.0, atol=_ROW_SUM_TOL):
                raise ArityMismatch(f"{v}: CPT rows must sum to 1")
            table.setflags(write=False)
            cpts[v] = table
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "cpts", cpts)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.dag.variables

    def arity_of(self, v: str) -> int:
        return len(self.states[v])

    def arity_map(self) -> dict[str, int]:
        return {v: len(self.states[v]) for v in self.variables}


def _parent_config_index(data: np.ndarray, parent_cols: Sequence[int],
                         parent_arities: Sequence[int]) -> np.ndarray:
    """Mixed-radix index of each row's parent configuration; first parent is
    the most significant digit."""
    if not parent_cols:
        return np.zeros(data.shape[0], dtype=np.int64)
    cols = tuple(data[:, j] for j in parent_cols)
    return np.ravel_multi_index(cols, tuple(parent_arities)).astype(np.int64)


def family_counts(dataset: Dataset, child: str, parent_list: Sequence[str]) -> np.ndarray:
    """Contingency table of child states per parent configuration.

    Returns an array of shape (q, s): rows follow the mixed-radix order of
    ``parent_list`` as given, columns are child states. Entries sum to N.
    """
    if child in parent_list:
        raise ArityMismatch(f"{child} cannot be its own parent")
    c = dataset.index_of(child)
    s = dataset.arities[c]
    p_cols = [dataset.index_of(p) for p in parent_list]
    p_arities = [dataset.arities[j] for j in p_cols]
    q = math.prod(p_arities)
    config = _parent_config_index(dataset.data, p_cols, p_arities)
    flat = config * s + dataset.data[:, c]
    return np.bincount(flat, minlength=q * s).reshape(q, s)


def mle_fit(dag: Dag, dataset: Dataset, smoothing: float = 0.0) -> DiscreteBn:
    """Fit CPTs as empirical conditional frequencies.

    Parent configurations with zero observations get a uniform row, which
    keeps the log-likelihood finite under re-sampling. ``smoothing`` adds a
    pseudo-count to every cell (off by default: pure MLE).
    """
    if tuple(dag.variables) != tuple(dataset.variables):
        raise ArityMismatch("dataset columns do not match graph variables")
    states = {v: dataset.state_labels[dataset.index_of(v)] for v in dag.variables}
    cpts = {}
    for v in dag.variables:
        counts = family_counts(dataset, v, dag.parents(v)).astype(float)
        if smoothing:
            counts += smoothing
        totals = counts.sum(axis=1, keepdims=True)
        s = counts.shape[1]
        table = np.divide(counts, totals, out=np.full_like(counts, 1.0 / s), where=totals > 0)
        cpts[v] = table
    return DiscreteBn(dag, states, cpts)


def forward_sample(bn: DiscreteBn, n: int, seed: int) -> Dataset:
    """Draw ``n`` complete rows by ancestral sampling in topological order.

    Pure function of (bn, n, seed): the same seed always reproduces the
    same dataset bit for bit.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    variables = bn.variables
    col = {v: i for i, v in enumerate(variables)}
    arities = [bn.arity_of(v) for v in variables]
    data = np.zeros((n, len(variables)), dtype=np.int64)
    for v in bn.dag.topological_order():
        parents = bn.dag.parents(v)
        p_cols = [col[p] for p in parents]
        p_arities = [arities[j] for j in p_cols]
        config = _parent_config_index(data, p_cols, p_arities)
        probs = bn.cpts[v][config]                      # (n, s)
        cum = np.cumsum(probs, axis=1)
        u = rng.random(n)
        drawn = (u[:, None] > cum).sum(axis=1)
        data[:, col[v]] = np.minimum(drawn, probs.shape[1] - 1)
    labels = tuple(bn.states[v] for v in variables)
    return Dataset(variables, tuple(arities), data, labels)
