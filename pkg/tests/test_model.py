import numpy as np
import pytest

from bnkit.errors import ArityMismatch
from bnkit.graph import Dag
from bnkit.model import Dataset, DiscreteBn, family_counts, forward_sample, mle_fit

from conftest import random_dataset


def naive_counts(dataset, child, parents):
    """Row-scan re-count, independent of the vectorised implementation."""
    c = dataset.index_of(child)
    p_idx = [dataset.index_of(p) for p in parents]
    p_arities = [dataset.arities[j] for j in p_idx]
    q = 1
    for a in p_arities:
        q *= a
    table = np.zeros((q, dataset.arities[c]), dtype=int)
    for row in dataset.data:
        cfg = 0
        for j, a in zip(p_idx, p_arities):
            cfg = cfg * a + row[j]
        table[cfg, row[c]] += 1
    return table


class TestFamilyCounts:
    def test_no_parents_uniform(self):
        ds = Dataset(("A",), (2,), np.array([[0], [1], [0], [1]]))
        assert family_counts(ds, "A", []).tolist() == [[2, 2]]

    def test_deterministic_copy_off_diagonal_zero(self):
        data = np.array([[0, 0], [1, 1]] * 5)
        ds = Dataset(("A", "B"), (2, 2), data)
        counts = family_counts(ds, "B", ["A"])
        assert counts[0, 1] == 0 and counts[1, 0] == 0
        assert counts[0, 0] == 5 and counts[1, 1] == 5

    def test_matches_row_scan_oracle(self, rng):
        for _ in range(25):
            ds = random_dataset(rng, 4, 6, max_arity=3)
            child = "v2"
            parents = ["v0", "v3"]
            assert np.array_equal(family_counts(ds, child, parents),
                                  naive_counts(ds, child, parents))

    def test_totals_equal_n(self, rng):
        ds = random_dataset(rng, 3, 50, max_arity=3)
        assert family_counts(ds, "v1", ["v0", "v2"]).sum() == 50

    def test_child_in_parents_rejected(self, rng):
        ds = random_dataset(rng, 2, 5)
        with pytest.raises(ArityMismatch):
            family_counts(ds, "v0", ["v0"])

    def test_slice_sums_match_parent_config_counts(self, rng):
        ds = random_dataset(rng, 3, 40, max_arity=3)
        counts = family_counts(ds, "v2", ["v0", "v1"])
        configs = naive_counts(ds, "v2", ["v0", "v1"]).sum(axis=1)
        assert np.array_equal(counts.sum(axis=1), configs)


class TestMleFit:
    def test_deterministic_copy(self):
        dag = Dag(("A", "B"), [("A", "B")])
        ds = Dataset(("A", "B"), (2, 2), np.array([[0, 0], [0, 0], [1, 1], [1, 1]]))
        bn = mle_fit(dag, ds)
        assert bn.cpts["B"][0, 0] == 1.0
        assert bn.cpts["B"][1, 1] == 1.0

    def test_marginal_frequency(self):
        ds = Dataset(("A",), (2,), np.array([[0], [1], [0], [1]]))
        bn = mle_fit(Dag(("A",)), ds)
        assert bn.cpts["A"][0, 0] == 0.5

    def test_unobserved_config_is_uniform(self):
        dag = Dag(("A", "B"), [("A", "B")])
        ds = Dataset(("A", "B"), (2, 2), np.array([[0, 0], [0, 1], [0, 0]]))
        bn = mle_fit(dag, ds)
        # A=1 never observed: direct count check, then the uniform row
        assert family_counts(ds, "B", ["A"])[1].sum() == 0
        assert bn.cpts["B"][1].tolist() == [0.5, 0.5]

    def test_smoothing_flag(self):
        ds = Dataset(("A",), (2,), np.array([[0], [0]]))
        assert mle_fit(Dag(("A",)), ds).cpts["A"][0].tolist() == [1.0, 0.0]
        smoothed = mle_fit(Dag(("A",)), ds, smoothing=1.0).cpts["A"][0]
        assert smoothed.tolist() == [0.75, 0.25]

    def test_column_mismatch_rejected(self, rng):
        ds = random_dataset(rng, 2, 5)
        with pytest.raises(ArityMismatch):
            mle_fit(Dag(("x", "y")), ds)


class TestForwardSample:
    def test_deterministic_cpt_copies_column(self):
        dag = Dag(("A", "B"), [("A", "B")])
        bn = DiscreteBn(dag, {"A": ("0", "1"), "B": ("0", "1")},
                        {"A": [[0.5, 0.5]], "B": [[1.0, 0.0], [0.0, 1.0]]})
        ds = forward_sample(bn, 500, seed=3)
        assert np.array_equal(ds.column("A"), ds.column("B"))

    def test_binomial_concentration(self):
        bn = DiscreteBn(Dag(("A",)), {"A": ("0", "1")}, {"A": [[0.7, 0.3]]})
        ds = forward_sample(bn, 100_000, seed=9)
        assert abs(ds.column("A").mean() - 0.3) < 0.01

    def test_same_seed_bit_identical(self):
        from bnkit.fixtures import mixed5

        bn = mixed5().bn
        a = forward_sample(bn, 250, seed=4)
        b = forward_sample(bn, 250, seed=4)
        assert np.array_equal(a.data, b.data)
        c = forward_sample(bn, 250, seed=5)
        assert not np.array_equal(a.data, c.data)

    def test_fit_then_sample_recovers_cpts(self):
        from bnkit.fixtures import chain3

        bn = chain3().bn
        big = forward_sample(bn, 100_000, seed=8)
        refit = mle_fit(bn.dag, big)
        for v in bn.variables:
            assert np.allclose(refit.cpts[v], bn.cpts[v], atol=0.01)

    def test_permuted_variable_order_same_joint(self):
        # same network declared in a different (still topological) column
        # order: joint empirical distributions agree within tolerance
        names = ("A", "B")
        bn1 = DiscreteBn(Dag(names, [("A", "B")]),
                         {"A": ("0", "1"), "B": ("0", "1")},
                         {"A": [[0.4, 0.6]], "B": [[0.9, 0.1], [0.2, 0.8]]})
        # reversed column order, same structure and parameters
        bn2 = DiscreteBn(Dag(("B", "A"), [("A", "B")]),
                         {"A": ("0", "1"), "B": ("0", "1")},
                         {"A": [[0.4, 0.6]], "B": [[0.9, 0.1], [0.2, 0.8]]})
        d1 = forward_sample(bn1, 50_000, seed=2)
        d2 = forward_sample(bn2, 50_000, seed=2)

        def joint(ds):
            a = ds.column("A")
            b = ds.column("B")
            return np.array([[np.mean((a == i) & (b == j)) for j in (0, 1)] for i in (0, 1)])

        assert np.allclose(joint(d1), joint(d2), atol=0.01)

    def test_cpt_row_sum_enforced(self):
        with pytest.raises(ArityMismatch):
            DiscreteBn(Dag(("A",)), {"A": ("0", "1")}, {"A": [[0.6, 0.6]]})
