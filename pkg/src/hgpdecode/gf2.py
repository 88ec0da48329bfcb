"""Sparse binary matrices and elimination over GF(2).

Matrices are stored as per-row sorted column supports.  Elimination packs rows
into uint64 words and runs in a compiled kernel, which keeps rank computations
on the ~10^4 x 2.4*10^4 stabilizer matrices of the large product codes cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np


@dataclass(frozen=True)
class Gf2Matrix:
    rows: int
    cols: int
    row_support: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.row_support) != self.rows:
            raise ValueError(f"expected {self.rows} row supports, got {len(self.row_support)}")
        for r, support in enumerate(self.row_support):
            prev = -1
            for c in support:
                if c <= prev or c >= self.cols:
                    raise ValueError(f"row {r}: support must be sorted, unique and < {self.cols}")
                prev = c

    @classmethod
    def from_supports(cls, supports: Iterable[Iterable[int]], cols: int) -> "Gf2Matrix":
        rows = tuple(tuple(sorted(set(int(c) for c in s))) for s in supports)
        return cls(len(rows), cols, rows)

    @classmethod
    def from_dense(cls, dense) -> "Gf2Matrix":
        a = np.asarray(dense) % 2
        if a.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        return cls(a.shape[0], a.shape[1], tuple(tuple(int(c) for c in np.flatnonzero(row)) for row in a))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r, support in enumerate(self.row_support):
            out[r, list(support)] = 1
        return out

    def transpose(self) -> "Gf2Matrix":
        cols: list[list[int]] = [[] for _ in range(self.cols)]
        for r, support in enumerate(self.row_support):
            for c in support:
                cols[c].append(r)
        return Gf2Matrix(self.cols, self.rows, tuple(tuple(c) for c in cols))

    def row_weights(self) -> list[int]:
        return [len(s) for s in self.row_support]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays, int64."""
        indptr = np.zeros(self.rows + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(s) for s in self.row_support])
        indices = np.fromiter((c for s in self.row_support for c in s), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    def mul_vec(self, vec) -> np.ndarray:
        """Matrix-vector product over GF(2)."""
        v = np.asarray(vec, dtype=np.uint8)
        if v.shape != (self.cols,):
            raise ValueError(f"vector length {v.shape} does not match {self.cols} columns")
        indptr, indices = self.csr()
        return _csr_mul(indptr, indices, v)

    def packed(self) -> np.ndarray:
        return pack_rows(self.row_support, self.cols)


@numba.njit(cache=True)
def _csr_mul(indptr, indices, v):
    rows = indptr.shape[0] - 1
    out = np.zeros(rows, dtype=np.uint8)
    for r in range(rows):
        acc = 0
        for k in range(indptr[r], indptr[r + 1]):
            acc ^= v[indices[k]]
        out[r] = acc
    return out


def pack_rows(supports: Sequence[Sequence[int]], cols: int) -> np.ndarray:
    words = max(1, (cols + 63) // 64)
    out = np.zeros((len(supports), words), dtype=np.uint64)
    for r, support in enumerate(supports):
        for c in support:
            out[r, c >> 6] |= np.uint64(1) << np.uint64(c & 63)
    return out


def pack_vector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.uint8)
    return pack_rows([np.flatnonzero(v)], v.shape[0])[0]


@numba.njit(cache=True)
def _echelon(rows, cols):
    """In-place row echelon form; returns pivot column per leading row."""
    r_total = rows.shape[0]
    pivots = np.empty(min(r_total, cols), dtype=np.int64)
    rank = 0
    one = np.uint64(1)
    for col in range(cols):
        if rank == r_total:
            break
        w = col >> 6
        bit = one << np.uint64(col & 63)
        piv = -1
        for r in range(rank, r_total):
            if rows[r, w] & bit:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(w, rows.shape[1]):
                tmp = rows[piv, k]
                rows[piv, k] = rows[rank, k]
                rows[rank, k] = tmp
        for r in range(piv + 1, r_total):
            if rows[r, w] & bit:
                for k in range(w, rows.shape[1]):
                    rows[r, k] ^= rows[rank, k]
        pivots[rank] = col
        rank += 1
    return pivots[:rank]


@numba.njit(cache=True)
def _reduce(basis, pivots, vec):
    v = vec.copy()
    one = np.uint64(1)
    for i in range(pivots.shape[0]):
        col = pivots[i]
        w = col >> 6
        if v[w] & (one << np.uint64(col & 63)):
            for k in range(w, v.shape[0]):
                v[k] ^= basis[i, k]
    return v


def gf2_rank(matrix: Gf2Matrix | np.ndarray) -> int:
    """Rank over GF(2).  Accepts a Gf2Matrix or a dense 0/1 array."""
    if not isinstance(matrix, Gf2Matrix):
        matrix = Gf2Matrix.from_dense(matrix)
    if matrix.rows == 0 or matrix.cols == 0:
        return 0
    return int(_echelon(matrix.packed(), matrix.cols).shape[0])


class RowSpan:
    """Row space of a binary matrix, kept in echelon form for membership tests.

    ``contains(v)`` is equivalent to ``rank([M; v]) == rank(M)`` but costs a
    single reduction pass instead of a fresh elimination.
    """

    def __init__(self, matrix: Gf2Matrix):
        self.cols = matrix.cols
        packed = matrix.packed()
        self._pivots = _echelon(packed, matrix.cols) if matrix.rows else np.empty(0, dtype=np.int64)
        self._basis = np.ascontiguousarray(packed[: self._pivots.shape[0]])
        self.rank = int(self._pivots.shape[0])

    def contains(self, vec) -> bool:
        v = np.asarray(vec, dtype=np.uint8)
        if v.shape != (self.cols,):
            raise ValueError(f"vector length {v.shape} does not match {self.cols} columns")
        if not v.any():
            return True
        if self.rank == 0:
            return False
        return not _reduce(self._basis, self._pivots, pack_vector(v)).any()
