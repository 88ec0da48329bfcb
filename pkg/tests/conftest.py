import os

import numpy as np
import pytest

from hgpdecode.graph import TannerGraph, configuration_model, improve_girth
from hgpdecode.product import hypergraph_product

SEEDS = [0x59824C5A, 0x9DCA707A, 0xE0218AA8, 0x81DA8035, 0x63B16DEB, 0x7DC89245]


def cycle_graph(L):
    """Length-L repetition-code cycle: check j joins variables j and j+1 mod L."""
    return TannerGraph.from_edges(L, L, [(v, c) for c in range(L) for v in (c, (c + 1) % L)], 2, 2)


def dense_rank(a):
    """Plain Gaussian elimination over GF(2) on a dense copy."""
    a = np.array(a, dtype=np.uint8) & 1
    rank = 0
    rows, cols = a.shape
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if a[r, col]), None)
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] ^= a[rank]
        rank += 1
    return rank


def in_rowspace(h_dense, vec):
    return dense_rank(h_dense) == dense_rank(np.vstack([h_dense, vec]))


def small_code_graph(n=20, dv=3, dc=4, seed=0):
    rng = np.random.default_rng(seed)
    g = configuration_model(n, n * dv // dc, dv, dc, rng)
    return improve_girth(g, 6, rng=rng)


@pytest.fixture(scope="session")
def graph34():
    return small_code_graph()


@pytest.fixture(scope="session")
def code625(graph34):
    """[[625, 25]] product of a girth-6 (3,4)-regular graph on 20 variables.

    The seed gives a classical [20, 5, 6] code, so the product has distance 6
    and every error of weight <= 2 is correctable; about half of the seeds
    give distance 4 instead.
    """
    return hypergraph_product(graph34)


@pytest.fixture(scope="session")
def toric4():
    return hypergraph_product(cycle_graph(4))


def long_runs_enabled():
    return os.environ.get("HGPDECODE_LONG", "") not in ("", "0")
