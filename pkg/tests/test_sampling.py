import numpy as np
import pytest

from bnkit.errors import TooFewVariables
from bnkit.fixtures import asia8, mixed5, sports9
from bnkit.graph import Dag
from bnkit.knowledge import graph_satisfies
from bnkit.sampling import (
    SampleRequest,
    build_spec,
    round_half_up,
    sample_edge_constraints,
    sample_forbidden_constraints,
    sample_initial_graph,
    sample_tiers,
)

from conftest import random_dag


def alarm_shaped_truth():
    """A 37-node, 46-edge DAG (the published tier/count example shape)."""
    rng = np.random.default_rng(20)
    names = [f"n{i:02d}" for i in range(37)]
    edges = []
    for i in range(1, 37):
        p = int(rng.integers(0, i))
        edges.append((names[p], names[i]))
    existing = set(edges)
    while len(edges) < 46:
        i, j = sorted(rng.integers(0, 37, size=2))
        if i == j:
            continue
        e = (names[i], names[j])
        if e in existing or (e[1], e[0]) in existing:
            continue
        edges.append(e)
        existing.add(e)
    return Dag(names, edges)


class TestRounding:
    def test_published_counts(self):
        assert [round_half_up(r * 46) for r in (0.05, 0.10, 0.20, 0.50)] == [2, 5, 9, 23]
        assert [round_half_up(r * 37) for r in (0.05, 0.10, 0.20, 0.50)] == [2, 4, 7, 19]

    def test_half_rounds_up(self):
        assert round_half_up(18.5) == 19
        assert round_half_up(2.3) == 2


class TestEdgeSampling:
    def test_alarm_shape_counts(self):
        truth = alarm_shaped_truth()
        assert truth.edge_count == 46
        for rate, expected in [(0.05, 2), (0.10, 5), (0.20, 9), (0.50, 23)]:
            assert len(sample_edge_constraints(truth, rate, seed=3)) == expected

    def test_nesting_across_rates(self):
        truth = alarm_shaped_truth()
        samples = {r: sample_edge_constraints(truth, r, seed=9)
                   for r in (0.05, 0.10, 0.20, 0.50)}
        rates = sorted(samples)
        for lo, hi in zip(rates, rates[1:]):
            assert samples[hi][:len(samples[lo])] == samples[lo]

    def test_same_seed_same_edges_across_approaches(self):
        truth = alarm_shaped_truth()
        directed = sample_edge_constraints(truth, 0.5, seed=4)
        again = sample_edge_constraints(truth, 0.5, seed=4)
        initial = sample_initial_graph(truth, 0.5, seed=4)
        assert directed == again
        assert initial.edges == set(directed)

    def test_forbidden_avoids_true_adjacencies(self):
        truth = alarm_shaped_truth()
        for rate in (0.05, 0.5):
            pairs = sample_forbidden_constraints(truth, rate, seed=5)
            assert len(pairs) == round_half_up(rate * 46)
            for a, b in pairs:
                assert not truth.adjacent(a, b)


class TestTierSampling:
    def test_alarm_shape_variable_counts(self):
        truth = alarm_shaped_truth()
        tiers = sample_tiers(truth, 0.2, seed=6)
        assert sum(len(t) for t in tiers.tiers) == 7

    def test_too_few_variables(self):
        truth = asia8().bn.dag  # 8 nodes: 5% and 10% select < 2
        with pytest.raises(TooFewVariables):
            sample_tiers(truth, 0.05, seed=1)
        with pytest.raises(TooFewVariables):
            sample_tiers(truth, 0.10, seed=1)
        assert sample_tiers(truth, 0.20, seed=1)  # 2 variables: fine

    def test_truth_satisfies_sampled_tiers(self, rng):
        for fixture in (mixed5(), asia8(), sports9()):
            truth = fixture.bn.dag
            for seed in range(10):
                for strict in (False, True):
                    approach = "str-tem" if strict else "rel-tem"
                    spec = build_spec(truth, approach, 0.5, seed)
                    assert graph_satisfies(truth, spec) == [], (fixture.name, seed)

    def test_variable_nesting(self):
        truth = alarm_shaped_truth()
        small = sample_tiers(truth, 0.2, seed=7)
        large = sample_tiers(truth, 0.5, seed=7)
        assert small.variables <= large.variables


class TestInitialGraph:
    def test_full_rate_returns_truth(self):
        truth = alarm_shaped_truth()
        assert sample_initial_graph(truth, 1.0, seed=1) is truth

    def test_half_rate_matches_edge_sample(self):
        truth = alarm_shaped_truth()
        g = sample_initial_graph(truth, 0.5, seed=2)
        assert g.edge_count == 23
        assert g.edges == set(sample_edge_constraints(truth, 0.5, seed=2))

    def test_output_always_valid_dag(self, rng):
        for _ in range(10):
            truth = random_dag(rng, 6, edge_prob=0.6)
            if truth.edge_count == 0:
                continue
            g = sample_initial_graph(truth, 0.5, seed=3)
            assert isinstance(g, Dag)


class TestSampleRequest:
    def test_illegal_rate_rejected(self):
        truth = alarm_shaped_truth()
        with pytest.raises(ValueError):
            SampleRequest(truth, "ini-gra", 0.05, seed=1)
        with pytest.raises(ValueError):
            SampleRequest(truth, "dir-edg", 1.0, seed=1)
        SampleRequest(truth, "dir-edg", 0.05, seed=1)
        SampleRequest(truth, "var-rel", None, seed=1)

    def test_truth_satisfies_every_sampled_spec(self, rng):
        truth = alarm_shaped_truth()
        cells = [("dir-edg", 0.5), ("und-edg", 0.5), ("for-edg", 0.5),
                 ("rel-tem", 0.2), ("str-tem", 0.2), ("ini-gra", 0.5),
                 ("var-rel", None)]
        for approach, rate in cells:
            for seed in range(5):
                spec = build_spec(truth, approach, rate, seed)
                assert graph_satisfies(truth, spec) == [], approach
