"""Syndromes and small-set-flip decoding for one Pauli sector of a product code."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO

import numba
import numpy as np

from ._bits import popcount, trailing_zeros
from .gf2 import Gf2Matrix
from .product import CssCode, Sector

MAX_LOCAL_CHECKS = 64
MAX_GENERATOR_WEIGHT = 20


def syndrome(h: Gf2Matrix, e) -> np.ndarray:
    """h . e over GF(2)."""
    return h.mul_vec(e)


@dataclass
class DecodeOutcome:
    error_guess: np.ndarray
    converged: bool
    iterations_bp: int = 0
    iterations_ssf: int = 0
    final_syndrome: np.ndarray | None = field(default=None, repr=False)
    trace: list[dict] = field(default_factory=list, repr=False)

    def write_trace(self, fh: IO[str]) -> None:
        """One JSON record per line."""
        for rec in self.trace:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


class SsfTables:
    """Precomputed local structure of every generator of a sector.

    For generator ``g``, ``loc`` lists the checks touched by its qubits and
    ``qmask[k]`` is the bitmask (over ``loc``) flipped by its k-th qubit, so
    the syndrome change of any subset is an XOR of masks.
    """

    def __init__(self, sector: Sector):
        checks, gens = sector.checks, sector.generators
        self.sector = sector
        self.num_checks = checks.rows
        self.num_qubits = checks.cols
        self.chk_ptr, self.chk_qubits = checks.csr()
        self.q_ptr, self.q_checks = checks.transpose().csr()
        self.gen_ptr, self.gen_qubits = gens.csr()
        q_checks = [tuple(self.q_checks[self.q_ptr[q]: self.q_ptr[q + 1]]) for q in range(checks.cols)]

        loc_ptr = [0]
        loc_chk: list[int] = []
        qmask: list[int] = []
        grid_a: list[int] = []
        chk_gens: list[list[int]] = [[] for _ in range(checks.rows)]
        for g, support in enumerate(gens.row_support):
            if len(support) > MAX_GENERATOR_WEIGHT:
                raise ValueError(f"generator {g} has weight {len(support)} > {MAX_GENERATOR_WEIGHT}")
            lines = [q_checks[q] for q in support]
            a, local = _grid_layout(lines)
            if local is None:
                local = sorted({c for line in lines for c in line})
            if len(local) > MAX_LOCAL_CHECKS:
                raise ValueError(f"generator {g} touches {len(local)} checks > {MAX_LOCAL_CHECKS}")
            pos = {c: i for i, c in enumerate(local)}
            for line in lines:
                mask = 0
                for c in line:
                    mask ^= 1 << pos[c]
                qmask.append(mask)
            for c in local:
                chk_gens[c].append(g)
            loc_chk.extend(local)
            loc_ptr.append(len(loc_chk))
            grid_a.append(a)
        self.loc_ptr = np.array(loc_ptr, dtype=np.int64)
        self.loc_chk = np.array(loc_chk, dtype=np.int64)
        self.qmask = np.array(qmask, dtype=np.uint64)
        # grid_a[g] > 0: the first grid_a[g] qubits of g flip disjoint rows and
        # the rest flip disjoint columns of a grid_a x b layout of its checks
        self.grid_a = np.array(grid_a, dtype=np.int64)
        self.cg_ptr = np.zeros(checks.rows + 1, dtype=np.int64)
        self.cg_ptr[1:] = np.cumsum([len(x) for x in chk_gens])
        self.cg_gen = np.array([g for x in chk_gens for g in x], dtype=np.int64)

    def syndrome(self, e) -> np.ndarray:
        return _csr_syndrome(self.chk_ptr, self.chk_qubits, np.ascontiguousarray(e, dtype=np.uint8))


def _grid_layout(lines):
    """Split a generator's qubits into a row block and a column block.

    Returns ``(a, local)`` with checks ordered row-major, where the first
    ``a`` qubits each cover one row and the others one column, or
    ``(0, None)`` when no such split exists.
    """
    w = len(lines)
    for a in range(1, w):
        b = w - a
        rows, cols = lines[:a], lines[a:]
        if any(len(r) != b for r in rows) or any(len(c) != a for c in cols):
            continue
        cell = {}
        ok = True
        for i, r in enumerate(rows):
            for c in r:
                if c in cell:
                    ok = False
                cell[c] = [i, -1]
        if not ok or len(cell) != a * b:
            continue
        for j, col in enumerate(cols):
            for c in col:
                if c not in cell or cell[c][1] != -1:
                    ok = False
                    break
                cell[c][1] = j
            if not ok:
                break
        if not ok:
            continue
        local = [0] * (a * b)
        for c, (i, j) in cell.items():
            local[i * b + j] = c
        return a, local
    return 0, None


@numba.njit(cache=True)
def _csr_syndrome(ptr, idx, e):
    out = np.zeros(ptr.shape[0] - 1, dtype=np.uint8)
    for r in range(out.shape[0]):
        acc = 0
        for k in range(ptr[r], ptr[r + 1]):
            acc ^= e[idx[k]]
        out[r] = acc
    return out


@numba.njit(cache=True)
def _local_syndrome(g, sigma, loc_ptr, loc_chk):
    loc = np.uint64(0)
    one = np.uint64(1)
    for i in range(loc_ptr[g], loc_ptr[g + 1]):
        if sigma[loc_chk[i]]:
            loc |= one << np.uint64(i - loc_ptr[g])
    return loc


@numba.njit(cache=True)
def _best_subset(loc, qm, start, w):
    """Best (delta, size, mask) over nonempty subsets; delta 0 means none improves.

    Ratios delta/size are compared exactly by cross-multiplication; equal
    ratios keep the smaller mask.
    """
    best_num = 0
    best_den = 1
    best_mask = 0
    pattern = np.uint64(0)
    mask = 0
    size = 0
    one = np.uint64(1)
    total = 1 << w
    for step in range(1, total):
        bit = trailing_zeros(np.uint64(step))
        mask ^= 1 << bit
        if mask & (1 << bit):
            size += 1
        else:
            size -= 1
        pattern ^= qm[start + bit]
        delta = 2 * popcount(loc & pattern) - popcount(pattern)
        if delta <= 0:
            continue
        lhs = delta * best_den
        rhs = best_num * size
        if lhs > rhs or (lhs == rhs and mask < best_mask):
            best_num = delta
            best_den = size
            best_mask = mask
    return best_num, best_den, best_mask


@numba.njit(cache=True)
def _best_subset_grid(loc, a, b, scratch):
    """Exact best subset for a row/column grid generator.

    Enumerates subsets X of the shorter side; for fixed X the gain of adding
    each line of the other side is independent, so the best choice of k lines
    is the top-k gains (lower index first among equal gains).
    """
    one = np.uint64(1)
    rows_u = scratch[0, :a]
    cols_u = scratch[1, :b]
    rows_u[:] = 0
    cols_u[:] = 0
    for i in range(a):
        for j in range(b):
            if (loc >> np.uint64(i * b + j)) & one:
                rows_u[i] |= one << np.uint64(j)
                cols_u[j] |= one << np.uint64(i)
    if a <= b:
        outer_n = a
        inner_n = b
        inner_u = cols_u
        outer_shift = 0
        inner_shift = a
    else:
        outer_n = b
        inner_n = a
        inner_u = rows_u
        outer_shift = a
        inner_shift = 0
    ints = scratch[2:].view(np.int64)
    total_u = ints[0, :inner_n]
    gain = ints[1, :inner_n]
    order = ints[2, :inner_n]
    for j in range(inner_n):
        total_u[j] = 2 * popcount(inner_u[j]) - outer_n
    best_num = 0
    best_den = 1
    best_mask = 0
    for x in range(1 << outer_n):
        xm = np.uint64(x)
        xs = popcount(xm)
        base = 0
        for j in range(inner_n):
            r = 2 * popcount(inner_u[j] & xm) - xs
            base += r
            gain[j] = total_u[j] - 2 * r
        # stable insertion sort by gain descending
        for j in range(inner_n):
            order[j] = j
        for j in range(1, inner_n):
            cur = order[j]
            k = j - 1
            while k >= 0 and gain[order[k]] < gain[cur]:
                order[k + 1] = order[k]
                k -= 1
            order[k + 1] = cur
        delta = base
        inner_mask = 0
        outer_mask = x << outer_shift
        for k in range(inner_n + 1):
            if k > 0:
                j = order[k - 1]
                delta += gain[j]
                inner_mask |= 1 << (inner_shift + j)
            size = xs + k
            if size == 0 or delta <= 0:
                continue
            mask = outer_mask | inner_mask
            lhs = delta * best_den
            rhs = best_num * size
            if lhs > rhs or (lhs == rhs and mask < best_mask):
                best_num = delta
                best_den = size
                best_mask = mask
    return best_num, best_den, best_mask


@numba.njit(cache=True)
def _evaluate(g, loc, qmask, gen_ptr, grid_a, use_grid, scratch):
    s = gen_ptr[g]
    w = gen_ptr[g + 1] - s
    a = grid_a[g]
    if use_grid and a > 0:
        return _best_subset_grid(loc, a, w - a, scratch)
    return _best_subset(loc, qmask, s, w)


@numba.njit(cache=True)
def _upper_bound(loc, qm, start, w):
    # delta(F)/|F| <= max over qubits of unsatisfied checks it touches
    ub = 0
    for k in range(w):
        u = popcount(loc & qm[start + k])
        if u > ub:
            ub = u
    return ub


@numba.njit(cache=True)
def _ssf_kernel(sigma, ehat, gen_ptr, gen_qubits, qmask, loc_ptr, loc_chk, cg_ptr, cg_gen, grid_a,
                full, use_grid, trace_gen, trace_mask, trace_weight):
    """Greedy small-set-flip.  Mutates ``sigma`` and ``ehat``; returns (iterations, weight)."""
    G = gen_ptr.shape[0] - 1
    bnum = np.zeros(G, dtype=np.int64)
    bden = np.ones(G, dtype=np.int64)
    bmask = np.zeros(G, dtype=np.int64)
    # 0 clean, 1 dirty (bound only)
    dirty = np.zeros(G, dtype=np.uint8)
    ub = np.zeros(G, dtype=np.int64)
    stamp = np.full(G, -1, dtype=np.int64)
    dlist = np.empty(G, dtype=np.int64)
    nd = 0
    scratch = np.zeros((5, MAX_GENERATOR_WEIGHT), dtype=np.uint64)

    weight = 0
    for c in range(sigma.shape[0]):
        weight += sigma[c]

    if full:
        for g in range(G):
            loc = _local_syndrome(g, sigma, loc_ptr, loc_chk)
            bnum[g], bden[g], bmask[g] = _evaluate(g, loc, qmask, gen_ptr, grid_a, use_grid, scratch)
    else:
        for c in range(sigma.shape[0]):
            if not sigma[c]:
                continue
            for k in range(cg_ptr[c], cg_ptr[c + 1]):
                g = cg_gen[k]
                if stamp[g] == 0:
                    continue
                stamp[g] = 0
                loc = _local_syndrome(g, sigma, loc_ptr, loc_chk)
                s = gen_ptr[g]
                ub[g] = _upper_bound(loc, qmask, s, gen_ptr[g + 1] - s)
                bnum[g] = 0
                dirty[g] = 1
                dlist[nd] = g
                nd += 1

    it = 0
    one = np.uint64(1)
    while True:
        best = -1
        for g in range(G):
            if dirty[g] == 0 and bnum[g] > 0:
                if best < 0 or bnum[g] * bden[best] > bnum[best] * bden[g]:
                    best = g
        if not full:
            # resolve dirty generators whose bound can reach the current best,
            # highest bounds first so the threshold rises quickly
            keep = 0
            top = 0
            for k in range(nd):
                g = dlist[k]
                if dirty[g]:
                    dlist[keep] = g
                    keep += 1
                    if ub[g] > top:
                        top = ub[g]
            nd = keep
            level = top
            while level > 0:
                if best >= 0 and level * bden[best] < bnum[best]:
                    break
                for k in range(nd):
                    g = dlist[k]
                    if dirty[g] == 0 or ub[g] != level:
                        continue
                    loc = _local_syndrome(g, sigma, loc_ptr, loc_chk)
                    bnum[g], bden[g], bmask[g] = _evaluate(g, loc, qmask, gen_ptr, grid_a, use_grid, scratch)
                    dirty[g] = 0
                    if bnum[g] > 0:
                        if best < 0:
                            best = g
                        else:
                            lhs = bnum[g] * bden[best]
                            rhs = bnum[best] * bden[g]
                            if lhs > rhs or (lhs == rhs and g < best):
                                best = g
                level -= 1
            keep = 0
            for k in range(nd):
                if dirty[dlist[k]]:
                    dlist[keep] = dlist[k]
                    keep += 1
            nd = keep
        if best < 0:
            break

        s = gen_ptr[best]
        w = gen_ptr[best + 1] - s
        m = bmask[best]
        pattern = np.uint64(0)
        for k in range(w):
            if (m >> k) & 1:
                ehat[gen_qubits[s + k]] ^= 1
                pattern ^= qmask[s + k]
        base = loc_ptr[best]
        p = pattern
        while p:
            i = trailing_zeros(p)
            sigma[loc_chk[base + i]] ^= 1
            p &= p - one
        weight -= bnum[best]
        if it < trace_gen.shape[0]:
            trace_gen[it] = best
            trace_mask[it] = m
            trace_weight[it] = weight
        it += 1

        if full:
            for g in range(G):
                loc = _local_syndrome(g, sigma, loc_ptr, loc_chk)
                bnum[g], bden[g], bmask[g] = _evaluate(g, loc, qmask, gen_ptr, grid_a, use_grid, scratch)
        else:
            p = pattern
            while p:
                i = trailing_zeros(p)
                p &= p - one
                c = loc_chk[base + i]
                for k in range(cg_ptr[c], cg_ptr[c + 1]):
                    g = cg_gen[k]
                    if stamp[g] == it:
                        continue
                    stamp[g] = it
                    loc = _local_syndrome(g, sigma, loc_ptr, loc_chk)
                    if loc == 0:
                        bnum[g] = 0
                        dirty[g] = 0
                        continue
                    sg = gen_ptr[g]
                    ub[g] = _upper_bound(loc, qmask, sg, gen_ptr[g + 1] - sg)
                    bnum[g] = 0
                    if dirty[g] == 0:
                        dirty[g] = 1
                        dlist[nd] = g
                        nd += 1
    return it, weight


class SsfDecoder:
    """Small-set-flip for one sector; owns no per-call state, safe to reuse."""

    def __init__(self, css: CssCode, sector: str = "x", *, tables: SsfTables | None = None):
        self.css = css
        self.tables = tables or SsfTables(css.sector(sector))

    def decode(self, sigma0, *, full_recompute: bool = False, grid: bool = True, trace: bool = False) -> DecodeOutcome:
        """Run SSF from ``sigma0``.

        ``full_recompute`` rescores every generator after each flip and
        ``grid=False`` forces plain subset enumeration; both exist to
        cross-check the fast path and give identical results.
        """
        t = self.tables
        sigma = np.array(sigma0, dtype=np.uint8)
        if sigma.shape != (t.num_checks,):
            raise ValueError(f"syndrome length {sigma.shape} does not match {t.num_checks} checks")
        ehat = np.zeros(t.num_qubits, dtype=np.uint8)
        cap = int(sigma.sum()) if trace else 0
        tg = np.zeros(cap, dtype=np.int64)
        tm = np.zeros(cap, dtype=np.int64)
        tw = np.zeros(cap, dtype=np.int64)
        it, weight = _ssf_kernel(sigma, ehat, t.gen_ptr, t.gen_qubits, t.qmask, t.loc_ptr, t.loc_chk,
                                 t.cg_ptr, t.cg_gen, t.grid_a, full_recompute, grid, tg, tm, tw)
        out = DecodeOutcome(ehat, weight == 0, 0, int(it), final_syndrome=sigma)
        if trace:
            out.trace = [
                {"iteration": i + 1, "generator": int(tg[i]), "subset_mask": int(tm[i]), "syndrome_weight": int(tw[i])}
                for i in range(it)
            ]
        return out


def ssf_decode(css: CssCode, sigma0, sector: str = "x", **kwargs) -> DecodeOutcome:
    return SsfDecoder(css, sector).decode(sigma0, **kwargs)


def ssf_reference(css: CssCode, sigma0, sector: str = "x") -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Brute-force SSF scanning every flip set at every step.  Slow; for tests.

    Returns the guess and the ``(generator, subset mask)`` sequence.
    """
    sec = css.sector(sector)
    cols = sec.checks.transpose().row_support
    sigma = {c for c, b in enumerate(np.asarray(sigma0)) if b}
    ehat = np.zeros(sec.checks.cols, dtype=np.uint8)
    steps = []
    while True:
        best = None
        for g, support in enumerate(sec.generators.row_support):
            for mask in range(1, 1 << len(support)):
                flipped: set[int] = set()
                size = 0
                for k, q in enumerate(support):
                    if (mask >> k) & 1:
                        flipped ^= set(cols[q])
                        size += 1
                delta = len(sigma) - len(sigma ^ flipped)
                if delta <= 0:
                    continue
                ratio = Fraction(delta, size)
                if best is None or ratio > best[0]:
                    best = (ratio, g, mask, flipped, support)
        if best is None:
            return ehat, steps
        _, g, mask, flipped, support = best
        for k, q in enumerate(support):
            if (mask >> k) & 1:
                ehat[q] ^= 1
        sigma ^= flipped
        steps.append((g, mask))
