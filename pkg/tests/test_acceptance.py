"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL|SKIP`` line straight to the
terminal.  Criteria 6 and 7 need 10^4 trials per point and only run with
HGPDECODE_LONG=1; criterion 8 runs only with HGPDECODE_FULL_SCALE=1.
"""

import itertools
import math
import os
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from conftest import cycle_graph, dense_rank, long_runs_enabled, small_code_graph
from hgpdecode.campaign import SweepConfig, curves_from, run_sweep, write_code_file
from hgpdecode.classical import bp_decode
from hgpdecode.graph import configuration_model, girth
from hgpdecode.hybrid import HybridDecoder
from hgpdecode.product import code_dimension, hypergraph_product
from hgpdecode.quantum import SsfDecoder, syndrome
from hgpdecode.stats import estimate_threshold, intervals_disjoint
from test_classical import brute_force_llr, random_tree

WORKERS = os.cpu_count() or 1


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def skip(capsys, number, reason):
    with capsys.disabled():
        print(f"\ncriterion {number}: SKIP  {reason}")
    pytest.skip(reason)


def code_file(tmp_path, n, dv, dc, seed=0):
    g = small_code_graph(n, dv, dc, seed=seed)
    return write_code_file(g, tmp_path / f"n{n}_{dv}{dc}_s{seed}.json")


def by_p(estimates, n_qubits):
    return {e.p: e for e in estimates if e.n_qubits == n_qubits}


def ci_text(e):
    return f"{e.failures}/{e.trials} [{e.ci_low:.4g}, {e.ci_high:.4g}]"


# ---------------------------------------------------------------------------


def test_criterion_1_dimension_formula(capsys):
    bad = []
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        dv, dc = [(3, 4), (2, 3), (4, 6), (5, 6), (2, 4)][seed % 5]
        n = int(rng.integers(1, 40 // dc + 1)) * dc
        g = configuration_model(n, n * dv // dc, dv, dc, rng)
        h = g.parity_check().to_dense()
        want = (g.n - dense_rank(h)) ** 2 + (g.m - dense_rank(h.T)) ** 2
        if code_dimension(hypergraph_product(g)) != want:
            bad.append(seed)
    fam = []
    for n, m, dv, dc in [(120, 100, 5, 6), (120, 90, 3, 4)]:
        css = hypergraph_product(configuration_model(n, m, dv, dc, 1))
        fam.append((css.n_qubits, code_dimension(css)))
    ok = not bad and fam == [(24400, 400), (22500, 900)]
    report(capsys, 1, ok, f"50 graphs, mismatches={bad}; families {fam}")


def test_criterion_2_rates(capsys):
    got = []
    for n, m, dv, dc in [(120, 100, 5, 6), (120, 90, 3, 4)]:
        css = hypergraph_product(configuration_model(n, m, dv, dc, 1))
        # design rate of the family when the transposed code is trivial
        design = (1 - Fraction(dv, dc)) ** 2 / (1 + Fraction(dv, dc) ** 2)
        got.append((Fraction(code_dimension(css), css.n_qubits), design))
    ok = got == [(Fraction(1, 61),) * 2, (Fraction(1, 25),) * 2]
    report(capsys, 2, ok, "rates " + ", ".join(f"{r} (design {d})" for r, d in got))


def test_criterion_3_ssf_descent(capsys):
    codes = [hypergraph_product(cycle_graph(4)), hypergraph_product(small_code_graph(8, 3, 4, seed=3)),
             hypergraph_product(small_code_graph()), hypergraph_product(small_code_graph(28, seed=1))]
    decoders = [SsfDecoder(c, s) for c in codes for s in ("x", "z")]
    rng = np.random.default_rng(31)
    violations = 0
    for i in range(10_000):
        dec = decoders[i % len(decoders)]
        t = dec.tables
        if i % 4 == 3:
            # arbitrary syndrome, not necessarily in the image of the checks
            sigma0 = (rng.random(t.num_checks) < 0.05).astype(np.uint8)
        else:
            e = (rng.random(t.num_qubits) < rng.uniform(0.005, 0.08)).astype(np.uint8)
            sigma0 = syndrome(t.sector.checks, e)
        out = dec.decode(sigma0, trace=True)
        weights = [int(sigma0.sum())] + [r["syndrome_weight"] for r in out.trace]
        if any(b >= a for a, b in zip(weights, weights[1:])) or out.iterations_ssf > sigma0.sum():
            violations += 1
    report(capsys, 3, violations == 0, f"10000 syndromes over 4 codes x 2 sectors, violations={violations}")


def test_criterion_4_weight_two_equivalence(capsys, code625):
    n = code625.n_qubits
    dec = HybridDecoder(code625, "x")
    span = code625.stabilizer_span("x")
    columns = code625.h_x.transpose().row_support
    total = nonconv = logical = 0
    for qs in itertools.chain(((q,) for q in range(n)), itertools.combinations(range(n), 2)):
        sigma0 = np.zeros(code625.h_x.rows, np.uint8)
        e = np.zeros(n, np.uint8)
        for q in qs:
            sigma0[list(columns[q])] ^= 1
            e[q] = 1
        out = dec.iter_bp_ssf(sigma0, 0.04)
        total += 1
        if not out.converged:
            nonconv += 1
        elif not span.contains(e ^ out.error_guess):
            logical += 1
    report(capsys, 4, logical == 0, f"{total} errors of weight <= 2 on [[625,25]], "
                                    f"logical={logical} non-converged={nonconv}")


def test_criterion_5_bp_on_trees(capsys):
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(500 + seed)
        g = random_tree(rng, int(rng.integers(4, 13)))
        assert girth(g) == math.inf
        probs = rng.uniform(0.05, 0.45, g.n)
        h = g.parity_check().to_dense()
        s = (h @ (rng.random(g.n) < probs).astype(np.uint8)) % 2
        _, want = brute_force_llr(h, s, probs)
        _, llr = bp_decode(g, s, 0.5, 2 * (g.n + g.m), priors=np.log((1 - probs) / probs))
        got = 1.0 / (1.0 + np.exp(llr))
        worst = max(worst, float(np.max(np.abs(got - want) / want)))
    report(capsys, 5, worst <= 1e-9, f"20 trees, max relative error {worst:.2e}")


def test_criterion_6_threshold_ordering(capsys, tmp_path):
    if not long_runs_enabled():
        skip(capsys, 6, "set HGPDECODE_LONG=1 (about 3 h on one core)")
    small, large = code_file(tmp_path, 20, 3, 4), code_file(tmp_path, 60, 3, 4)
    cfg = SweepConfig((str(small.path), str(large.path)), "iterbp-ssf", (0.05, 0.10), 10_000,
                      max_failures=None, seed=6, workers=WORKERS)
    ests = run_sweep(cfg, write=False)
    s, l = by_p(ests, small.n_qubits), by_p(ests, large.n_qubits)
    below = l[0.05].wer < s[0.05].wer and intervals_disjoint((l[0.05].ci_low, l[0.05].ci_high),
                                                             (s[0.05].ci_low, s[0.05].ci_high))
    above = l[0.10].wer > s[0.10].wer and intervals_disjoint((l[0.10].ci_low, l[0.10].ci_high),
                                                             (s[0.10].ci_low, s[0.10].ci_high))
    detail = (f"p=0.05: {large.n_qubits} {ci_text(l[0.05])} vs {small.n_qubits} {ci_text(s[0.05])}; "
              f"p=0.10: {ci_text(l[0.10])} vs {ci_text(s[0.10])}")
    report(capsys, 6, below and above, detail)


def test_criterion_7_ssf_crossing(capsys, tmp_path):
    if not long_runs_enabled():
        skip(capsys, 7, "set HGPDECODE_LONG=1 (about 15 min on one core)")
    small, large = code_file(tmp_path, 36, 5, 6), code_file(tmp_path, 72, 5, 6)
    grid = (0.01, 0.02, 0.03, 0.04, 0.05, 0.06)
    cfg = SweepConfig((str(small.path), str(large.path)), "ssf", grid, 10_000, max_failures=None, seed=7,
                      workers=WORKERS)
    br = estimate_threshold(curves_from(run_sweep(cfg, write=False)))
    ok = br.overlaps(0.02, 0.07)
    est = "-" if br.estimate is None else f"{br.estimate:.4f}"
    report(capsys, 7, ok, f"(5,6) codes {small.n_qubits} and {large.n_qubits}: bracket "
                          f"[{br.low}, {br.high}] estimate {est}")


@pytest.mark.full_scale
def test_criterion_8_full_scale_cell(capsys, tmp_path):
    if os.environ.get("HGPDECODE_FULL_SCALE", "") in ("", "0"):
        skip(capsys, 8, "set HGPDECODE_FULL_SCALE=1 (single [[22500,900]] cell)")
    code = code_file(tmp_path, 120, 3, 4)
    assert (code.n_qubits, code.k) == (22500, 900)
    cfg = SweepConfig((str(code.path),), "iterbp-ssf", (0.02,), 3000, max_failures=None, seed=8, workers=WORKERS)
    (e,) = run_sweep(cfg, write=False)
    report(capsys, 8, e.ci_high < 1e-2, f"[[22500,900]] p=0.02: {ci_text(e)}")


def test_criterion_9_noisy_sanity(capsys, tmp_path):
    codes = (str(code_file(tmp_path, 20, 3, 4).path), str(code_file(tmp_path, 28, 3, 4, seed=1).path))
    trials = 2000
    noisy = run_sweep(SweepConfig(codes, "heurbp", (0.01, 0.06), trials, rounds=(0, 4), max_failures=None,
                                  final_decoder="heurbp-ssf", seed=9, workers=WORKERS), write=False)
    ideal = run_sweep(SweepConfig(codes, "heurbp-ssf", (0.01, 0.06), trials, max_failures=None, seed=9,
                                  workers=WORKERS), write=False)
    z_crit = norm.ppf(1 - 0.01 / 2)
    ok = True
    parts = []
    for nq in sorted({e.n_qubits for e in noisy}):
        t4 = {e.p: e for e in noisy if e.n_qubits == nq and e.T == 4}
        lo, hi = t4[0.01], t4[0.06]
        ordered = lo.wer < hi.wer and intervals_disjoint((lo.ci_low, lo.ci_high), (hi.ci_low, hi.ci_high))
        ok &= ordered
        parts.append(f"{nq} T=4: {ci_text(lo)} < {ci_text(hi)}")
        t0 = {e.p: e for e in noisy if e.n_qubits == nq and e.T == 0}
        for p, ref in by_p(ideal, nq).items():
            a = t0[p]
            pooled = (a.failures + ref.failures) / (a.trials + ref.trials)
            se = math.sqrt(pooled * (1 - pooled) * (1 / a.trials + 1 / ref.trials))
            z = 0.0 if se == 0 else (a.wer - ref.wer) / se
            ok &= abs(z) < z_crit
            parts.append(f"{nq} T=0 vs ideal p={p}: z={z:+.2f}")
    report(capsys, 9, ok, "; ".join(parts))


def test_criterion_10_determinism(capsys, tmp_path):
    codes = (str(code_file(tmp_path, 20, 3, 4).path), str(code_file(tmp_path, 28, 3, 4, seed=1).path))
    files = []
    for tag, workers in [("a", 1), ("b", 1), ("c", max(2, WORKERS))]:
        for kind, extra in [("ideal", dict(decoder="iterbp-ssf")), ("noisy", dict(decoder="heurbp", rounds=(0, 2)))]:
            out = tmp_path / f"{kind}_{tag}.csv"
            run_sweep(SweepConfig(codes, p_grid=(0.02, 0.07), trials=150, max_failures=25, seed=10, out=str(out),
                                  block_size=20, workers=workers, **extra))
            files.append((tag, kind, out.read_bytes(), out.with_suffix(".json").read_bytes()))
    groups = {}
    for tag, kind, csv_bytes, json_bytes in files:
        groups.setdefault(kind, set()).add((csv_bytes, json_bytes))
    ok = all(len(v) == 1 for v in groups.values())
    report(capsys, 10, ok, "ideal and noisy sweeps, two reruns at 1 worker and one at 2 workers, byte-identical")
