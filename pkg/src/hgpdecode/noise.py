"""Noise channels, single trials and the logical-failure test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hybrid import T_MAX, HybridDecoder
from .product import CssCode

IDEAL_DECODERS = ("ssf", "iterbp-ssf", "heurbp-ssf")
ROUND_DECODERS = ("heurbp", "heurbp-ssf")
FINAL_DECODERS = ("heurbp-ssf", "iterbp-ssf")

# BP needs a finite prior; p = 0 campaigns decode with this instead
_MIN_PRIOR_P = 1e-9


class NonzeroSyndromeError(ValueError):
    """A logical-failure query on an error that is not in the code space."""


@dataclass(frozen=True)
class NoiseConfig:
    p_qubit: float
    p_syndrome: float | None = None
    rounds: int = 0

    def __post_init__(self) -> None:
        for name, val in (("p_qubit", self.p_qubit), ("p_syndrome", self.p_syndrome)):
            if val is not None and not 0.0 <= val < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {val}")
        if self.rounds < 0:
            raise ValueError("rounds must be non-negative")

    @property
    def syndrome_p(self) -> float:
        return self.p_qubit if self.p_syndrome is None else self.p_syndrome


@dataclass(frozen=True)
class TrialResult:
    success: bool
    residual_weight: int
    detected_failure: bool


def sample_error(length: int, p: float, rng) -> np.ndarray:
    """i.i.d. Bernoulli(p) bits."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    return (rng.random(length) < p).astype(np.uint8)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial of one cell."""
    return np.random.default_rng([seed, trial_index])


def is_logical_failure(css: CssCode, residual, sector: str = "x") -> bool:
    """True when a zero-syndrome residual is not a product of stabilizers."""
    sec = css.sector(sector)
    residual = np.asarray(residual, dtype=np.uint8)
    if sec.checks.mul_vec(residual).any():
        raise NonzeroSyndromeError("residual has a nonzero syndrome")
    return not css.stabilizer_span(sector).contains(residual)


def _prior(p: float) -> float:
    return max(p, _MIN_PRIOR_P)


class TrialRunner:
    """Per-worker simulation context for one code and sector."""

    def __init__(self, css: CssCode, sector: str = "x", t_max: int = T_MAX):
        self.css = css
        self.sector = sector
        self.decoder = HybridDecoder(css, sector)
        self.span = css.stabilizer_span(sector)
        self.t_max = t_max

    @property
    def num_qubits(self) -> int:
        return self.decoder.num_qubits

    def decode_exact(self, decoder: str, sigma, p: float):
        """Decode an exact syndrome; returns a DecodeOutcome."""
        d = self.decoder
        if decoder == "ssf":
            return d.ssf.decode(sigma)
        if decoder == "iterbp-ssf":
            return d.iter_bp_ssf(sigma, _prior(p), self.t_max)
        if decoder == "heurbp-ssf":
            return d.heur_bp_ssf(sigma, _prior(p), noisy_checks=False)
        raise ValueError(f"decoder {decoder!r} is not an exact-syndrome decoder; choose from {IDEAL_DECODERS}")

    def decode_round(self, decoder: str, xi, p: float, p_syndrome: float) -> np.ndarray:
        """Correction for one noisy round, BP on the noisy-check graph."""
        d = self.decoder
        if decoder == "heurbp":
            return d.heur_bp(xi, _prior(p), noisy_checks=True, p_syndrome=_prior(p_syndrome))
        if decoder == "heurbp-ssf":
            return d.heur_bp_ssf(xi, _prior(p), noisy_checks=True, p_syndrome=_prior(p_syndrome)).error_guess
        raise ValueError(f"decoder {decoder!r} cannot run on noisy rounds; choose from {ROUND_DECODERS}")

    def classify(self, residual, converged: bool) -> TrialResult:
        weight = int(residual.sum())
        if not converged:
            return TrialResult(False, weight, True)
        return TrialResult(self.span.contains(residual), weight, False)

    def ideal_trial(self, p: float, decoder: str, rng) -> TrialResult:
        e = sample_error(self.num_qubits, p, rng)
        sigma = self.decoder.syndrome(e)
        out = self.decode_exact(decoder, sigma, p)
        return self.classify(e ^ out.error_guess, out.converged)

    def noisy_sampling_trial(self, noise: NoiseConfig, dec1: str, dec2: str, rng, *, history=None) -> TrialResult:
        """``noise.rounds`` noisy rounds corrected by ``dec1``, then an exact round for ``dec2``.

        ``history``, when a list, receives ``(sampled, correction)`` pairs per
        round for bookkeeping checks.
        """
        if dec2 not in FINAL_DECODERS:
            raise ValueError(f"final decoder must be one of {FINAL_DECODERS}, got {dec2!r}")
        if dec1 not in ROUND_DECODERS:
            raise ValueError(f"round decoder must be one of {ROUND_DECODERS}, got {dec1!r}")
        p, ps = noise.p_qubit, noise.syndrome_p
        n, m = self.num_qubits, self.decoder.num_checks
        e = np.zeros(n, dtype=np.uint8)
        for _ in range(noise.rounds):
            ei = sample_error(n, p, rng)
            e ^= ei
            sigma = self.decoder.syndrome(e)
            xi = sigma ^ sample_error(m, ps, rng)
            corr = self.decode_round(dec1, xi, p, ps)
            e ^= corr
            if history is not None:
                history.append((ei, corr))
        ei = sample_error(n, p, rng)
        e ^= ei
        out = self.decode_exact(dec2, self.decoder.syndrome(e), p)
        if history is not None:
            history.append((ei, out.error_guess))
        return self.classify(e ^ out.error_guess, out.converged)


def _runner(css: CssCode, sector: str) -> TrialRunner:
    cache = css.__dict__.setdefault("_runners", {})
    if sector not in cache:
        cache[sector] = TrialRunner(css, sector)
    return cache[sector]


def ideal_trial(css: CssCode, p: float, decoder: str, rng, sector: str = "x") -> TrialResult:
    return _runner(css, sector).ideal_trial(p, decoder, rng)


def noisy_sampling_trial(css: CssCode, noise: NoiseConfig, dec1: str, dec2: str, rng, sector: str = "x") -> TrialResult:
    return _runner(css, sector).noisy_sampling_trial(noise, dec1, dec2, rng)
