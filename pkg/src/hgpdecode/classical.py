"""Classical decoders on a factor graph: flip and syndrome-based sum-product BP."""

from __future__ import annotations

import math
from collections import deque

import numba
import numpy as np

from .gf2 import Gf2Matrix
from .graph import TannerGraph

MSG_CLAMP = 30.0
ATANH_CLAMP = 1.0 - 1e-12


def flip_decode(graph: TannerGraph, word) -> np.ndarray:
    """Flip bits that see strictly more unsatisfied than satisfied checks.

    Variables are scanned in index order and flippable ones are processed as
    a FIFO queue.  The result may still have a nonzero syndrome.
    """
    w = np.array(word, dtype=np.uint8)
    if w.shape != (graph.n,):
        raise ValueError(f"word length {w.shape} does not match n = {graph.n}")
    unsat = [sum(int(w[v]) for v in nbrs) & 1 for nbrs in graph.adj_c]

    def flippable(u: int) -> bool:
        bad = sum(unsat[c] for c in graph.adj_v[u])
        return 2 * bad > len(graph.adj_v[u])

    queue = deque(u for u in range(graph.n) if flippable(u))
    queued = set(queue)
    while queue:
        u = queue.popleft()
        queued.discard(u)
        if not flippable(u):
            continue
        w[u] ^= 1
        for c in graph.adj_v[u]:
            unsat[c] ^= 1
        for c in graph.adj_v[u]:
            for x in graph.adj_c[c]:
                if x not in queued and flippable(x):
                    queue.append(x)
                    queued.add(x)
    return w


def extend_noisy_checks(graph: TannerGraph) -> TannerGraph:
    """Attach one new degree-1 variable ``n + j`` to every check ``j``."""
    edges = [(v, c) for v, c in graph.edges()]
    edges += [(graph.n + c, c) for c in range(graph.m)]
    return TannerGraph.from_edges(graph.n + graph.m, graph.m, edges)


def extend_matrix(h: Gf2Matrix) -> Gf2Matrix:
    """Parity-check matrix form of :func:`extend_noisy_checks`: [H | I]."""
    rows = tuple(tuple(s) + (h.cols + j,) for j, s in enumerate(h.row_support))
    return Gf2Matrix(h.rows, h.cols + h.rows, rows)


def llr_prior(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"error probability must lie in (0, 1), got {p}")
    return math.log((1.0 - p) / p)


class FactorArrays:
    """Edge-indexed view of a parity-check matrix.

    Edges are numbered check by check; ``var_edges`` lists each variable's
    edges in check order.
    """

    def __init__(self, h: Gf2Matrix):
        self.num_checks = h.rows
        self.num_vars = h.cols
        self.chk_ptr, self.edge_var = h.csr()
        edge_chk = np.repeat(np.arange(h.rows, dtype=np.int64), np.diff(self.chk_ptr))
        order = np.lexsort((edge_chk, self.edge_var))
        self.var_edges = order.astype(np.int64)
        self.var_ptr = np.zeros(h.cols + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.edge_var, minlength=h.cols), out=self.var_ptr[1:])
        self.edge_chk = edge_chk
        self._lookup = {(int(v), int(c)): e for e, (v, c) in enumerate(zip(self.edge_var, edge_chk))}

    @classmethod
    def from_graph(cls, graph: TannerGraph | Gf2Matrix) -> "FactorArrays":
        return cls(graph.parity_check() if isinstance(graph, TannerGraph) else graph)

    def edge(self, v: int, c: int) -> int:
        try:
            return self._lookup[(v, c)]
        except KeyError:
            raise ValueError(f"({v}, {c}) is not an edge") from None

    def check_neighbours(self, c: int) -> np.ndarray:
        return self.edge_var[self.chk_ptr[c]: self.chk_ptr[c + 1]]

    def var_neighbours(self, v: int) -> np.ndarray:
        return self.edge_chk[self.var_edges[self.var_ptr[v]: self.var_ptr[v + 1]]]


class BpState:
    """Mutable flooding-BP scratch state for one syndrome.

    ``t`` counts completed rounds; ``llr`` is recomputed after each round.
    """

    def __init__(self, arrays: FactorArrays, syndrome, p, *, priors=None):
        self.arrays = arrays
        self.syndrome = np.ascontiguousarray(syndrome, dtype=np.uint8)
        if self.syndrome.shape != (arrays.num_checks,):
            raise ValueError(f"syndrome length {self.syndrome.shape} does not match {arrays.num_checks} checks")
        if priors is None:
            priors = np.full(arrays.num_vars, llr_prior(p))
        self.prior_llr = np.ascontiguousarray(priors, dtype=np.float64)
        num_edges = arrays.edge_var.shape[0]
        self.msg_v2c = np.clip(self.prior_llr[arrays.edge_var], -MSG_CLAMP, MSG_CLAMP)
        self.msg_c2v = np.zeros(num_edges)
        self.llr = self.prior_llr.copy()
        self.t = 0

    @classmethod
    def with_priors(cls, arrays: FactorArrays, syndrome, priors) -> "BpState":
        return cls(arrays, syndrome, None, priors=priors)

    def step(self, rounds: int = 1) -> None:
        a = self.arrays
        for _ in range(rounds):
            _bp_round(a.chk_ptr, a.edge_var, a.var_ptr, a.var_edges, self.syndrome,
                      self.prior_llr, self.msg_v2c, self.msg_c2v, self.llr)
            self.t += 1

    def run_to(self, t: int) -> None:
        if t < self.t:
            raise ValueError("BP state cannot run backwards")
        self.step(t - self.t)

    def guess(self) -> np.ndarray:
        """Hard decision: 1 where the LLR is negative, ties decide 0."""
        return (self.llr < 0).astype(np.uint8)


def check_to_bit(state: BpState, c: int, v: int) -> float:
    """New message from check ``c`` to variable ``v`` from the current v->c messages."""
    a = state.arrays
    own = a.edge(v, c)
    prod = 1.0
    for e in range(a.chk_ptr[c], a.chk_ptr[c + 1]):
        if e != own:
            m = min(max(state.msg_v2c[e], -MSG_CLAMP), MSG_CLAMP)
            prod *= math.tanh(m / 2.0)
    prod = min(max(prod, -ATANH_CLAMP), ATANH_CLAMP)
    out = 2.0 * math.atanh(prod)
    return -out if state.syndrome[c] else out


def bit_to_check(state: BpState, v: int, c: int) -> float:
    """New message from variable ``v`` to check ``c`` from the current c->v messages."""
    a = state.arrays
    own = a.edge(v, c)
    total = state.prior_llr[v]
    for k in range(a.var_ptr[v], a.var_ptr[v + 1]):
        e = a.var_edges[k]
        if e != own:
            total += state.msg_c2v[e]
    return min(max(total, -MSG_CLAMP), MSG_CLAMP)


@numba.njit(cache=True)
def _bp_round(chk_ptr, edge_var, var_ptr, var_edges, syn, prior, v2c, c2v, llr):
    num_checks = chk_ptr.shape[0] - 1
    for c in range(num_checks):
        a = chk_ptr[c]
        b = chk_ptr[c + 1]
        for own in range(a, b):
            prod = 1.0
            for e in range(a, b):
                if e != own:
                    m = min(max(v2c[e], -MSG_CLAMP), MSG_CLAMP)
                    prod *= np.tanh(m / 2.0)
            prod = min(max(prod, -ATANH_CLAMP), ATANH_CLAMP)
            out = 2.0 * np.arctanh(prod)
            c2v[own] = -out if syn[c] else out
    num_vars = var_ptr.shape[0] - 1
    for v in range(num_vars):
        a = var_ptr[v]
        b = var_ptr[v + 1]
        total = prior[v]
        for k in range(a, b):
            total += c2v[var_edges[k]]
        llr[v] = total
        for k in range(a, b):
            own = var_edges[k]
            s = prior[v]
            for j in range(a, b):
                e = var_edges[j]
                if e != own:
                    s += c2v[e]
            v2c[own] = min(max(s, -MSG_CLAMP), MSG_CLAMP)


def bp_decode(graph: TannerGraph | Gf2Matrix, syndrome, p: float, T: int, *, priors=None):
    """Run ``T`` flooding rounds and return ``(error_guess, final_llr)``."""
    if T < 0:
        raise ValueError("T must be non-negative")
    arrays = FactorArrays.from_graph(graph)
    state = BpState(arrays, syndrome, p, priors=priors)
    state.step(T)
    return state.guess(), state.llr.copy()
