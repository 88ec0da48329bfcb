"""Hypergraph-product quantum LDPC codes from random biregular graphs, with
flip, BP, small-set-flip and hybrid BP+SSF decoders and a Monte Carlo harness."""

from .classical import BpState, FactorArrays, bp_decode, extend_noisy_checks, flip_decode, llr_prior
from .gf2 import Gf2Matrix, RowSpan, gf2_rank
from .graph import ACYCLIC, TannerGraph, configuration_model, girth, improve_girth
from .hybrid import HybridDecoder, heur_bp, heur_bp_ssf, iter_bp_ssf
from .noise import NoiseConfig, TrialResult, ideal_trial, is_logical_failure, noisy_sampling_trial, sample_error
from .product import CssCode, classical_dimensions, code_dimension, hypergraph_product
from .quantum import DecodeOutcome, SsfDecoder, ssf_decode, syndrome
from .stats import ThresholdBracket, confidence_interval, estimate_threshold

__all__ = [
    "ACYCLIC", "BpState", "CssCode", "DecodeOutcome", "FactorArrays", "Gf2Matrix", "HybridDecoder",
    "NoiseConfig", "RowSpan", "SsfDecoder", "TannerGraph", "ThresholdBracket", "TrialResult",
    "bp_decode", "classical_dimensions", "code_dimension", "confidence_interval", "configuration_model",
    "estimate_threshold", "extend_noisy_checks", "flip_decode", "gf2_rank", "girth", "heur_bp",
    "heur_bp_ssf", "hypergraph_product", "ideal_trial", "improve_girth", "is_logical_failure",
    "iter_bp_ssf", "llr_prior", "noisy_sampling_trial", "sample_error", "ssf_decode", "syndrome",
]
