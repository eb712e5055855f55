import numpy as np
import pytest

from bnkit.graph import Dag
from bnkit.model import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dag(rng, n_vars: int, edge_prob: float = 0.4) -> Dag:
    """Random DAG: orient each pair low-index -> high-index with the given
    probability, then shuffle which variable gets which index role."""
    names = [f"v{i}" for i in range(n_vars)]
    order = list(rng.permutation(n_vars))
    edges = []
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            if rng.random() < edge_prob:
                edges.append((names[order[i]], names[order[j]]))
    return Dag(names, edges)


def random_dataset(rng, n_vars: int, n_rows: int, max_arity: int = 2) -> Dataset:
    names = tuple(f"v{i}" for i in range(n_vars))
    arities = tuple(int(rng.integers(2, max_arity + 1)) for _ in names)
    data = np.column_stack([rng.integers(0, a, size=n_rows) for a in arities])
    return Dataset(names, arities, data)
