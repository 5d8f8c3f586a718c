"""Robust output-feedback synthesis and analysis for interval fractional-order plants."""

from .interval import IntervalMatrix, IntervalOrderError, UncertainPlant, sample_member
from .synthesis import (ControllerRealization, SynthesisCertificate, SynthesisError,
                        SynthesisOptions, closed_loop, synthesize)
from .analysis import lemma2_check, robust_verify, sector_check
from .fosim import gl_weights, mittag_leffler, simulate

__all__ = [
    "IntervalMatrix", "IntervalOrderError", "UncertainPlant", "sample_member",
    "ControllerRealization", "SynthesisCertificate", "SynthesisError", "SynthesisOptions",
    "closed_loop", "synthesize", "lemma2_check", "robust_verify", "sector_check",
    "gl_weights", "mittag_leffler", "simulate",
]
__version__ = "0.1.0"
