import numpy as np
import pytest

from tplab import FiniteField, chain_from_graph, two_state_chain


def random_symmetric(rng, d, scale=1.0):
    raw = rng.standard_normal((d, d))
    return scale * 0.5 * (raw + raw.T)


def random_field(rng, n_states, d, scale=1.0):
    raw = rng.standard_normal((n_states, d, d))
    return FiniteField(scale * 0.5 * (raw + raw.transpose(0, 2, 1)))


def k_complete(n):
    return np.ones((n, n)) - np.eye(n)


def cycle_adjacency(n):
    adj = np.zeros((n, n))
    for i in range(n):
        adj[i, (i + 1) % n] = adj[(i + 1) % n, i] = 1.0
    return adj


@pytest.fixture(scope="session")
def two_state():
    return two_state_chain(1.0)


@pytest.fixture(scope="session")
def k4():
    return chain_from_graph(k_complete(4), 3, name="k4")


@pytest.fixture(scope="session")
def cycle4():
    return chain_from_graph(cycle_adjacency(4), 2, name="cycle4")
