"""Bipartite factor graphs: random biregular generation, girth, file format."""

from __future__ import annotations

import logging
import math
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .gf2 import Gf2Matrix

log = logging.getLogger(__name__)

ACYCLIC = math.inf


class GraphParameterError(ValueError):
    pass


class GraphGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TannerGraph:
    """Variable nodes ``0..n-1`` and check nodes ``0..m-1``.

    Adjacency lists are kept sorted; that canonical form makes equality and
    file round-trips bit-exact.  ``delta_v``/``delta_c`` are the nominal
    degrees, 0 meaning irregular.
    """

    n: int
    m: int
    adj_v: tuple[tuple[int, ...], ...]
    adj_c: tuple[tuple[int, ...], ...]
    delta_v: int = 0
    delta_c: int = 0

    def __post_init__(self) -> None:
        if len(self.adj_v) != self.n or len(self.adj_c) != self.m:
            raise GraphParameterError("adjacency sizes do not match (n, m)")
        for v, nbrs in enumerate(self.adj_v):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphParameterError(f"variable {v}: neighbours must be sorted and unique")
            if self.delta_v and len(nbrs) != self.delta_v:
                raise GraphParameterError(f"variable {v} has degree {len(nbrs)}, expected {self.delta_v}")
            for c in nbrs:
                if not 0 <= c < self.m:
                    raise GraphParameterError(f"check index {c} out of range")
        for c, nbrs in enumerate(self.adj_c):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphParameterError(f"check {c}: neighbours must be sorted and unique")
            if self.delta_c and len(nbrs) != self.delta_c:
                raise GraphParameterError(f"check {c} has degree {len(nbrs)}, expected {self.delta_c}")
        if self.edge_set() != {(v, c) for c, nbrs in enumerate(self.adj_c) for v in nbrs}:
            raise GraphParameterError("adjacency is not symmetric")

    @classmethod
    def from_edges(cls, n: int, m: int, edges: Iterable[tuple[int, int]], delta_v: int = 0, delta_c: int = 0) -> "TannerGraph":
        """Build from ``(v, c)`` pairs.  Parallel edges are rejected."""
        adj_v: list[set[int]] = [set() for _ in range(n)]
        adj_c: list[set[int]] = [set() for _ in range(m)]
        for v, c in edges:
            v, c = int(v), int(c)
            if not (0 <= v < n and 0 <= c < m):
                raise GraphParameterError(f"edge ({v}, {c}) out of range")
            if c in adj_v[v]:
                raise GraphParameterError(f"parallel edge ({v}, {c})")
            adj_v[v].add(c)
            adj_c[c].add(v)
        return cls(
            n,
            m,
            tuple(tuple(sorted(s)) for s in adj_v),
            tuple(tuple(sorted(s)) for s in adj_c),
            delta_v,
            delta_c,
        )

    @classmethod
    def from_parity_check(cls, h) -> "TannerGraph":
        h = np.asarray(h) % 2
        m, n = h.shape
        return cls.from_edges(n, m, ((int(v), int(c)) for c, v in zip(*np.nonzero(h))))

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj_v)

    def edges(self) -> list[tuple[int, int]]:
        """``(v, c)`` pairs ordered by check, then variable."""
        return [(v, c) for c, nbrs in enumerate(self.adj_c) for v in nbrs]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(v, c) for v, nbrs in enumerate(self.adj_v) for c in nbrs}

    def parity_check(self) -> Gf2Matrix:
        """H, one row per check."""
        return Gf2Matrix(self.m, self.n, self.adj_c)

    def to_text(self) -> str:
        lines = [f"tanner {self.n} {self.m} {self.delta_v} {self.delta_c}"]
        lines.extend(f"{c} {v}" for v, c in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TannerGraph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise GraphParameterError("empty graph file")
        header = lines[0].split()
        if len(header) != 5 or header[0] != "tanner":
            raise GraphParameterError(f"bad header line: {lines[0]!r}")
        n, m, dv, dc = (int(x) for x in header[1:])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise GraphParameterError(f"bad edge line: {ln!r}")
            c, v = int(parts[0]), int(parts[1])
            edges.append((v, c))
        return cls.from_edges(n, m, edges, dv, dc)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "TannerGraph":
        return cls.from_text(Path(path).read_text())


def configuration_model(n: int, m: int, delta_v: int, delta_c: int, rng=None) -> TannerGraph:
    """Random (delta_v, delta_c)-biregular simple bipartite graph.

    Variable ports are matched to check ports by a random permutation; any
    parallel edge is then removed by swapping its variable endpoint with that
    of a random other edge.
    """
    if n < 1 or m < 1 or delta_v < 1 or delta_c < 1:
        raise GraphParameterError("n, m and degrees must be positive")
    if n * delta_v != m * delta_c:
        raise GraphParameterError(f"n*delta_v = {n * delta_v} differs from m*delta_c = {m * delta_c}")
    if delta_v > m or delta_c > n:
        raise GraphParameterError("degree exceeds the size of the opposite side")
    rng = np.random.default_rng(rng)
    num_edges = n * delta_v
    ev = np.repeat(np.arange(n), delta_v)[rng.permutation(num_edges)]
    ec = np.repeat(np.arange(m), delta_c)
    counts = Counter(zip(ev.tolist(), ec.tolist()))

    budget = 100 * num_edges
    while True:
        dup = [i for i in range(num_edges) if counts[(int(ev[i]), int(ec[i]))] > 1]
        if not dup:
            break
        for i in dup:
            vi, ci = int(ev[i]), int(ec[i])
            if counts[(vi, ci)] < 2:
                continue
            while True:
                if budget == 0:
                    raise GraphGenerationError("could not remove parallel edges within the swap budget")
                budget -= 1
                j = int(rng.integers(num_edges))
                vj, cj = int(ev[j]), int(ec[j])
                if vj == vi or cj == ci or (vj, ci) in counts or (vi, cj) in counts:
                    continue
                counts[(vi, ci)] -= 1
                counts[(vj, cj)] -= 1
                if counts[(vj, cj)] == 0:
                    del counts[(vj, cj)]
                counts[(vj, ci)] = 1
                counts[(vi, cj)] = 1
                ev[i], ev[j] = vj, vi
                break
    return TannerGraph.from_edges(n, m, zip(ev.tolist(), ec.tolist()), delta_v, delta_c)


def _neighbours(adj_v, adj_c, n):
    """Node-level adjacency with checks offset by n."""
    nbrs = [[n + c for c in a] for a in adj_v]
    nbrs.extend([list(a) for a in adj_c])
    return nbrs


def _girth_nodes(nbrs, bound=math.inf):
    best = bound
    size = len(nbrs)
    for root in range(size):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            dx = dist[x]
            # any cycle closed from depth dx has length >= 2*dx
            if 2 * dx >= best:
                break
            for y in nbrs[x]:
                if y == parent[x]:
                    continue
                if y in dist:
                    best = min(best, dx + dist[y] + 1)
                else:
                    dist[y] = dx + 1
                    parent[y] = x
                    queue.append(y)
    return best


def girth(graph: TannerGraph) -> float:
    """Length of the shortest cycle, or ``ACYCLIC`` (inf) for forests."""
    g = _girth_nodes(_neighbours(graph.adj_v, graph.adj_c, graph.n))
    return g if g == ACYCLIC else int(g)


def _edge_cycle(adj_v, adj_c, v, c, limit):
    """Shortest cycle through edge (v, c), or inf when none has length <= limit."""
    # BFS from v to c avoiding the edge itself; a path of length L closes a cycle of L + 1.
    max_path = limit - 1
    frontier = [("v", v)]
    seen_v = {v}
    seen_c = set()
    depth = 0
    while frontier and depth < max_path:
        depth += 1
        nxt = []
        for kind, x in frontier:
            if kind == "v":
                for y in adj_v[x]:
                    if x == v and y == c:
                        continue
                    if y == c:
                        return depth + 1
                    if y not in seen_c:
                        seen_c.add(y)
                        nxt.append(("c", y))
            else:
                for y in adj_c[x]:
                    if y not in seen_v:
                        seen_v.add(y)
                        nxt.append(("v", y))
        frontier = nxt
    return math.inf


def improve_girth(graph: TannerGraph, target_girth: int = 6, max_swaps: int = 10_000, rng=None) -> TannerGraph:
    """Swap edge pairs to remove short cycles, best effort.

    An edge on a shortest cycle is rewired together with a random partner
    edge; the swap is kept only if neither new edge closes a cycle of length
    <= the current girth.  Degrees are preserved and the girth never drops.
    ``max_swaps`` bounds the number of attempted swaps.
    """
    if target_girth < 6 or target_girth % 2:
        raise GraphParameterError("target girth must be even and >= 6")
    rng = np.random.default_rng(rng)
    adj_v = [set(a) for a in graph.adj_v]
    adj_c = [set(a) for a in graph.adj_c]
    g = girth(graph)
    attempts = 0
    while g < target_girth and attempts < max_swaps:
        edges = [(v, c) for v in range(graph.n) for c in sorted(adj_v[v])]
        bad = [e for e in edges if _edge_cycle(adj_v, adj_c, e[0], e[1], g) <= g]
        progress = False
        for k in rng.permutation(len(bad)):
            v1, c1 = bad[k]
            if c1 not in adj_v[v1] or _edge_cycle(adj_v, adj_c, v1, c1, g) > g:
                continue
            # a few partners per bad edge before moving on
            for _ in range(16):
                if attempts >= max_swaps:
                    break
                attempts += 1
                v2, c2 = edges[int(rng.integers(len(edges)))]
                if c2 not in adj_v[v2] or v2 == v1 or c2 == c1 or c2 in adj_v[v1] or c1 in adj_v[v2]:
                    continue
                _swap(adj_v, adj_c, v1, c1, v2, c2)
                if (_edge_cycle(adj_v, adj_c, v1, c2, g) > g and _edge_cycle(adj_v, adj_c, v2, c1, g) > g):
                    progress = True
                    break
                _swap(adj_v, adj_c, v1, c2, v2, c1)
            if attempts >= max_swaps:
                break
        g_new = _girth_nodes(_neighbours(adj_v, adj_c, graph.n))
        if g_new > g:
            g = g_new
        elif not progress:
            break
    out = TannerGraph(
        graph.n,
        graph.m,
        tuple(tuple(sorted(a)) for a in adj_v),
        tuple(tuple(sorted(a)) for a in adj_c),
        graph.delta_v,
        graph.delta_c,
    )
    if g < target_girth:
        log.warning("girth improvement stopped at girth %s (target %d)", g, target_girth)
    return out


def _swap(adj_v, adj_c, v1, c1, v2, c2):
    """(v1,c1),(v2,c2) -> (v1,c2),(v2,c1)."""
    adj_v[v1].remove(c1)
    adj_v[v2].remove(c2)
    adj_c[c1].remove(v1)
    adj_c[c2].remove(v2)
    adj_v[v1].add(c2)
    adj_v[v2].add(c1)
    adj_c[c2].add(v1)
    adj_c[c1].add(v2)
