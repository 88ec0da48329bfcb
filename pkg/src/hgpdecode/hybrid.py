"""BP followed by SSF: the iterated and the first-minimum hybrids."""

from __future__ import annotations

import numpy as np

from .classical import BpState, FactorArrays, extend_matrix, llr_prior
from .product import CssCode
from .quantum import DecodeOutcome, SsfDecoder

T_MAX = 100
HEUR_ROUND_CAP = 200


class HybridDecoder:
    """Decoders for one sector of a product code.

    Holds the read-only tables (SSF structure, BP edge arrays for the plain
    and the noisy-check graph); every call allocates its own BP state, so
    one instance can serve any number of sequential decodes.
    """

    def __init__(self, css: CssCode, sector: str = "x"):
        self.css = css
        self.sector = css.sector(sector)
        self.ssf = SsfDecoder(css, sector)
        self.num_qubits = self.sector.checks.cols
        self.num_checks = self.sector.checks.rows
        self.plain = FactorArrays(self.sector.checks)
        self.extended = FactorArrays(extend_matrix(self.sector.checks))
        # most recent BP state, kept for inspection of priors and round counts
        self.last_bp: BpState | None = None

    def syndrome(self, e) -> np.ndarray:
        return self.ssf.tables.syndrome(e)

    def _bp_state(self, sigma0, p: float, noisy_checks: bool, p_syndrome: float | None) -> BpState:
        if not noisy_checks:
            return BpState(self.plain, sigma0, p)
        ps = p if p_syndrome is None else p_syndrome
        priors = np.empty(self.num_qubits + self.num_checks)
        priors[: self.num_qubits] = llr_prior(p)
        priors[self.num_qubits:] = llr_prior(ps)
        return BpState.with_priors(self.extended, sigma0, priors)

    def iter_bp_ssf(self, sigma0, p: float, t_max: int = T_MAX) -> DecodeOutcome:
        """SSF after T = 0, 1, ..., t_max rounds of BP; first valid correction wins.

        BP rounds are computed once and extended one at a time.  A BP guess
        identical to an earlier one is not passed to SSF again: SSF is
        deterministic, so it would fail again.
        """
        if t_max < 0:
            raise ValueError("t_max must be non-negative")
        sigma0 = np.asarray(sigma0, dtype=np.uint8)
        state = BpState(self.plain, sigma0, p)
        self.last_bp = state
        tried: set[bytes] = set()
        last = None
        for T in range(t_max + 1):
            if T:
                state.step()
            guess = state.guess()
            key = guess.tobytes()
            if key in tried:
                continue
            tried.add(key)
            residual = sigma0 ^ self.syndrome(guess)
            out = self.ssf.decode(residual)
            combined = guess ^ out.error_guess
            if out.converged:
                return DecodeOutcome(combined, True, T, out.iterations_ssf)
            last = DecodeOutcome(combined, False, T, out.iterations_ssf)
        last.iterations_bp = t_max
        return last

    def heur_bp_rounds(self, sigma0, p: float, *, noisy_checks: bool = True,
                       p_syndrome: float | None = None) -> tuple[np.ndarray, int]:
        """First-minimum BP; returns the qubit guess and the BP rounds it came from."""
        sigma0 = np.asarray(sigma0, dtype=np.uint8)
        state = self._bp_state(sigma0, p, noisy_checks, p_syndrome)
        self.last_bp = state
        return first_minimum_bp(state, self.syndrome, self.num_qubits)

    def heur_bp(self, sigma0, p: float, **kwargs) -> np.ndarray:
        return self.heur_bp_rounds(sigma0, p, **kwargs)[0]

    def heur_bp_ssf(self, sigma0, p: float, **kwargs) -> DecodeOutcome:
        sigma0 = np.asarray(sigma0, dtype=np.uint8)
        e_bp, rounds = self.heur_bp_rounds(sigma0, p, **kwargs)
        out = self.ssf.decode(sigma0 ^ self.syndrome(e_bp))
        return DecodeOutcome(e_bp ^ out.error_guess, out.converged, rounds, out.iterations_ssf)


def first_minimum_bp(state: BpState, syndrome_of, num_vars: int) -> tuple[np.ndarray, int]:
    """Advance ``state`` one round at a time while the residual syndrome shrinks.

    The residual weight of each guess, truncated to its first ``num_vars``
    variables, is compared with the previous one (starting from the zero
    guess); on the first round that does not decrease it, the previous guess
    is returned together with its round count.
    """
    sigma0 = state.syndrome
    e_cur = np.zeros(num_vars, dtype=np.uint8)
    w_cur = int(sigma0.sum())
    while True:
        e_prev, w_prev = e_cur, w_cur
        state.step()
        e_cur = state.guess()[:num_vars]
        w_cur = int((sigma0 ^ syndrome_of(e_cur)).sum())
        if not w_cur < w_prev:
            return e_prev, state.t - 1
        if state.t >= HEUR_ROUND_CAP:
            return e_cur, state.t


def _decoder(css: CssCode, sector: str) -> HybridDecoder:
    cache = css.__dict__.setdefault("_hybrid", {})
    if sector not in cache:
        cache[sector] = HybridDecoder(css, sector)
    return cache[sector]


def iter_bp_ssf(css: CssCode, sigma0, p: float, t_max: int = T_MAX, sector: str = "x") -> DecodeOutcome:
    return _decoder(css, sector).iter_bp_ssf(sigma0, p, t_max)


def heur_bp(css: CssCode, sigma0, p: float, sector: str = "x", **kwargs) -> np.ndarray:
    """Qubit part of the first-minimum BP guess (noisy-check graph by default)."""
    return _decoder(css, sector).heur_bp(sigma0, p, **kwargs)


def heur_bp_ssf(css: CssCode, sigma0, p: float, sector: str = "x", **kwargs) -> DecodeOutcome:
    return _decoder(css, sector).heur_bp_ssf(sigma0, p, **kwargs)
