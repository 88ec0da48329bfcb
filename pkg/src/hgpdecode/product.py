"""Hypergraph product of a factor graph with itself.

Qubit order: the (v, v') pairs first in row-major order, then the (c, c')
pairs.  X generators are indexed by (v, c) -> v*m + c and Z generators by
(c, v) -> c*n + v.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterator

from .gf2 import Gf2Matrix, RowSpan, gf2_rank
from .graph import TannerGraph

QUBIT_ORDER = "vv-then-cc-rowmajor/1"


@dataclass(frozen=True)
class Sector:
    """One Pauli sector.

    ``checks`` measures the simulated error type; ``generators`` are the
    opposite-type stabilizers, whose supports form the SSF flip sets and
    whose row space is the trivial-error group.
    """

    name: str
    checks: Gf2Matrix
    generators: Gf2Matrix


@dataclass(frozen=True, eq=False)
class CssCode:
    base: TannerGraph
    h_x: Gf2Matrix
    h_z: Gf2Matrix

    @property
    def n_qubits(self) -> int:
        return self.base.n ** 2 + self.base.m ** 2

    def qubit_vv(self, v: int, v2: int) -> int:
        return v * self.base.n + v2

    def qubit_cc(self, c: int, c2: int) -> int:
        return self.base.n ** 2 + c * self.base.m + c2

    def x_index(self, v: int, c: int) -> int:
        return v * self.base.m + c

    def z_index(self, c: int, v: int) -> int:
        return c * self.base.n + v

    def qubit_label(self, q: int) -> tuple[str, int, int]:
        n, m = self.base.n, self.base.m
        if q < n * n:
            return ("vv", q // n, q % n)
        q -= n * n
        return ("cc", q // m, q % m)

    def sector(self, name: str = "x") -> Sector:
        """``"x"``: Z errors seen by H_X, flip sets from H_Z.  ``"z"``: swapped."""
        if name == "x":
            return Sector("x", self.h_x, self.h_z)
        if name == "z":
            return Sector("z", self.h_z, self.h_x)
        raise ValueError(f"unknown sector {name!r}")

    def flip_sets(self, generator: int, sector: str = "x") -> Iterator[tuple[int, ...]]:
        """All nonempty subsets of one generator's support."""
        support = self.sector(sector).generators.row_support[generator]
        for size in range(1, len(support) + 1):
            yield from combinations(support, size)

    def flip_set_count(self, sector: str = "x") -> int:
        return sum((1 << len(s)) - 1 for s in self.sector(sector).generators.row_support)

    @cached_property
    def rank_x(self) -> int:
        return gf2_rank(self.h_x)

    @cached_property
    def rank_z(self) -> int:
        return gf2_rank(self.h_z)

    def stabilizer_span(self, sector: str = "x") -> RowSpan:
        cache = self.__dict__.setdefault("_spans", {})
        if sector not in cache:
            cache[sector] = RowSpan(self.sector(sector).generators)
        return cache[sector]


def hypergraph_product(graph: TannerGraph) -> CssCode:
    n, m = graph.n, graph.m
    nn = n * n
    x_rows = []
    for v in range(n):
        for c in range(m):
            support = [v * n + v2 for v2 in graph.adj_c[c]]
            support += [nn + c2 * m + c for c2 in graph.adj_v[v]]
            x_rows.append(tuple(sorted(support)))
    z_rows = []
    for c in range(m):
        for v in range(n):
            support = [v2 * n + v for v2 in graph.adj_c[c]]
            support += [nn + c * m + c2 for c2 in graph.adj_v[v]]
            z_rows.append(tuple(sorted(support)))
    n_qubits = nn + m * m
    return CssCode(graph, Gf2Matrix(n * m, n_qubits, tuple(x_rows)), Gf2Matrix(n * m, n_qubits, tuple(z_rows)))


def classical_dimensions(graph: TannerGraph) -> tuple[int, int]:
    """(k, k~): dimensions of ker H and ker H^T."""
    r = gf2_rank(graph.parity_check())
    return graph.n - r, graph.m - r


def code_dimension(css: CssCode) -> int:
    """Number of logical qubits, n_qubits - rank H_X - rank H_Z."""
    return css.n_qubits - css.rank_x - css.rank_z
