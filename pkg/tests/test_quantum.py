import io
import json

import numpy as np
import pytest

from conftest import SEEDS, cycle_graph, in_rowspace, small_code_graph
from hgpdecode.classical import flip_decode
from hgpdecode.graph import TannerGraph
from hgpdecode.product import hypergraph_product
from hgpdecode.quantum import SsfDecoder, ssf_decode, ssf_reference, syndrome


@pytest.fixture(scope="module")
def code100():
    return hypergraph_product(small_code_graph(8, 3, 4, seed=3))


def random_error(rng, n, weight):
    e = np.zeros(n, np.uint8)
    e[rng.choice(n, weight, replace=False)] = 1
    return e


def check_descent(out, sigma0):
    weights = [int(sigma0.sum())] + [r["syndrome_weight"] for r in out.trace]
    assert all(b < a for a, b in zip(weights, weights[1:]))
    assert out.iterations_ssf == len(out.trace) <= int(sigma0.sum())


# ---------------------------------------------------------------------------
# syndrome


def test_syndrome_basics(code625):
    n = code625.n_qubits
    assert not syndrome(code625.h_x, np.zeros(n, np.uint8)).any()
    for row in code625.h_z.row_support[:50]:
        e = np.zeros(n, np.uint8)
        e[list(row)] = 1
        assert not syndrome(code625.h_x, e).any()
    with pytest.raises(ValueError):
        syndrome(code625.h_x, np.zeros(n + 1, np.uint8))


def test_single_qubit_syndrome_follows_adjacency(code625):
    g = code625.base
    for v, v2 in [(0, 0), (3, 7), (19, 11)]:
        e = np.zeros(code625.n_qubits, np.uint8)
        e[code625.qubit_vv(v, v2)] = 1
        got = set(np.flatnonzero(syndrome(code625.h_x, e)))
        assert got == {code625.x_index(v, c) for c in g.adj_v[v2]}


# ---------------------------------------------------------------------------
# SSF


def test_ssf_zero_syndrome(code625):
    out = ssf_decode(code625, np.zeros(code625.h_x.rows, np.uint8))
    assert out.converged and out.iterations_ssf == 0 and not out.error_guess.any()


@pytest.mark.parametrize("q", range(32))
def test_ssf_single_qubit_on_toric_code(toric4, q):
    e = np.zeros(32, np.uint8)
    e[q] = 1
    out = ssf_decode(toric4, syndrome(toric4.h_x, e))
    assert out.converged
    assert in_rowspace(toric4.h_z.to_dense(), e ^ out.error_guess)


def test_ssf_solves_half_plaquette_that_stalls_qubit_flip():
    css = hypergraph_product(cycle_graph(5))
    checks = TannerGraph.from_parity_check(css.h_x.to_dense())
    support = css.h_z.row_support[7]
    cols = css.h_x.transpose().row_support
    pair = next((a, b) for a in support for b in support if a < b and set(cols[a]) & set(cols[b]))
    e = np.zeros(css.n_qubits, np.uint8)
    e[list(pair)] = 1
    sigma0 = syndrome(css.h_x, e)
    # two qubits of a plaquette sharing a check: every qubit sees at most one unsatisfied check of two
    stuck = flip_decode(checks, e)
    assert syndrome(css.h_x, stuck).any()
    out = ssf_decode(css, sigma0, trace=True)
    assert out.converged
    check_descent(out, sigma0)
    assert in_rowspace(css.h_z.to_dense(), e ^ out.error_guess)


@pytest.mark.parametrize("seed", SEEDS)
def test_ssf_descent_and_consistency(code625, seed):
    rng = np.random.default_rng(seed)
    dec = SsfDecoder(code625)
    for _ in range(50):
        e = random_error(rng, code625.n_qubits, int(rng.integers(1, 40)))
        sigma0 = syndrome(code625.h_x, e)
        out = dec.decode(sigma0, trace=True)
        check_descent(out, sigma0)
        residual = sigma0 ^ syndrome(code625.h_x, out.error_guess)
        assert np.array_equal(residual, out.final_syndrome)
        assert out.converged == (not residual.any())


@pytest.mark.parametrize("seed", range(100))
def test_incremental_matches_full_recompute(code625, seed):
    rng = np.random.default_rng(seed)
    e = random_error(rng, code625.n_qubits, int(rng.integers(5, 60)))
    sigma0 = syndrome(code625.h_x, e)
    dec = SsfDecoder(code625)
    fast = dec.decode(sigma0, trace=True)
    full = dec.decode(sigma0, trace=True, full_recompute=True)
    plain = dec.decode(sigma0, trace=True, grid=False)
    assert fast.trace == full.trace == plain.trace
    assert np.array_equal(fast.error_guess, full.error_guess)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("sector", ["x", "z"])
def test_selection_matches_brute_force(code100, seed, sector):
    rng = np.random.default_rng(seed)
    sec = code100.sector(sector)
    for _ in range(3):
        e = random_error(rng, code100.n_qubits, int(rng.integers(2, 12)))
        sigma0 = sec.checks.mul_vec(e)
        out = ssf_decode(code100, sigma0, sector, trace=True)
        want_guess, want_steps = ssf_reference(code100, sigma0, sector)
        assert [(r["generator"], r["subset_mask"]) for r in out.trace] == want_steps
        assert np.array_equal(out.error_guess, want_guess)


def test_selection_on_random_syndromes_matches_brute_force(toric4):
    # arbitrary syndromes, not only those of an error
    rng = np.random.default_rng(5)
    for _ in range(20):
        sigma0 = (rng.random(16) < 0.3).astype(np.uint8)
        out = ssf_decode(toric4, sigma0, trace=True)
        want_guess, want_steps = ssf_reference(toric4, sigma0)
        assert [(r["generator"], r["subset_mask"]) for r in out.trace] == want_steps
        assert np.array_equal(out.error_guess, want_guess)


def test_trace_records_are_json_lines(toric4):
    e = np.zeros(32, np.uint8)
    e[[0, 5]] = 1
    out = ssf_decode(toric4, syndrome(toric4.h_x, e), trace=True)
    buf = io.StringIO()
    out.write_trace(buf)
    recs = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert recs == out.trace and len(recs) == out.iterations_ssf
    assert set(recs[0]) == {"iteration", "generator", "subset_mask", "syndrome_weight"}


def test_ssf_rejects_wrong_length(toric4):
    with pytest.raises(ValueError):
        ssf_decode(toric4, np.zeros(15, np.uint8))
