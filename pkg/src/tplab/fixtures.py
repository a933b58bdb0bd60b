"""Built-in model and field fixtures used by the CLI and the test suite."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .models import (
    FiniteChain,
    FiniteField,
    GaussianChaos,
    GaussianSeries,
    chain_from_graph,
    complete_refresh_chain,
    product_chain,
    two_state_chain,
)

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def _k4_chain() -> FiniteChain:
    adj = np.ones((4, 4)) - np.eye(4)
    return chain_from_graph(adj, 3, name="k4")


def _cycle4_chain() -> FiniteChain:
    adj = np.zeros((4, 4))
    for i in range(4):
        adj[i, (i + 1) % 4] = adj[(i + 1) % 4, i] = 1.0
    return chain_from_graph(adj, 2, name="cycle4")


def _refresh_product() -> FiniteChain:
    base = complete_refresh_chain(np.full(3, 1.0 / 3.0), name="refresh3")
    return product_chain(base, 2)


def _pauli_series() -> GaussianSeries:
    return GaussianSeries(np.stack([PAULI_Z, PAULI_X]))


def _psd_chaos() -> GaussianChaos:
    coef = np.zeros((2, 2, 1, 1))
    coef[0, 0, 0, 0] = 1.0
    coef[1, 1, 0, 0] = 1.0
    return GaussianChaos(coef)


_MODEL_FIXTURES = {
    "two-state": {
        "build": lambda: two_state_chain(1.0),
        "kind": "chain",
        "description": "rate-1 symmetric two-state chain (gap 2, alpha 1/2)",
        "citation": "scalar-poincare",
    },
    "k4": {
        "build": _k4_chain,
        "kind": "chain",
        "description": "random walk on the complete graph K4 (alpha 3/4)",
        "citation": "trace-poincare",
    },
    "cycle4": {
        "build": _cycle4_chain,
        "kind": "chain",
        "description": "random walk on the 4-cycle (alpha 1)",
        "citation": "trace-poincare",
    },
    "refresh-product": {
        "build": _refresh_product,
        "kind": "chain",
        "description": "two-fold product of the complete-refresh chain on 3 "
                       "uniform states (alpha 1)",
        "citation": "poincare-subadditivity",
    },
    "pauli-series": {
        "build": _pauli_series,
        "kind": "gaussian-series",
        "description": "Gaussian series with the two real Pauli coefficients "
                       "(alpha 1, variance proxy 2)",
        "citation": "subexp-tail",
    },
    "psd-chaos": {
        "build": _psd_chaos,
        "kind": "gaussian-chaos",
        "description": "scalar Gaussian chaos with PSD coefficient matrix "
                       "diag(1, 1)",
        "citation": "chaos-scalar",
    },
}


def get_model(name: str):
    entry = _MODEL_FIXTURES.get(name)
    if entry is None:
        raise ConfigError(f"unknown model fixture '{name}' "
                          f"(known: {sorted(_MODEL_FIXTURES)})")
    return entry["build"]()


def get_field(name: str, chain: FiniteChain) -> FiniteField:
    if name == "indicator-1":
        values = np.zeros(chain.n_states)
        values[min(1, chain.n_states - 1)] = 1.0
        return FiniteField.from_scalars(values)
    raise ConfigError(f"unknown field fixture '{name}' (known: ['indicator-1'])")


def catalog() -> list[dict]:
    rows = [
        dict(name=name, kind=entry["kind"], description=entry["description"],
             citation=entry["citation"])
        for name, entry in sorted(_MODEL_FIXTURES.items())
    ]
    rows.append(dict(
        name="indicator-1", kind="field",
        description="scalar field 1 at state index 1 and 0 elsewhere "
                    "(the gap eigenfunction of the two-state chain)",
        citation="scalar-poincare"))
    return rows
