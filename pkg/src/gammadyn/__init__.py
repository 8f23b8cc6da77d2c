"""Annulus coverability and weighted-shift counterexample construction."""

from .core_l2 import DirectSumVec, SparseSeq
from .scalar_sets import ScalarSet, classify_cover, extract_basis
from .construction import BuildConfig, build_counterexample
from .certify import measure_orbit_errors, verify_conditions

__all__ = ["SparseSeq", "DirectSumVec", "ScalarSet", "classify_cover", "extract_basis",
           "BuildConfig", "build_counterexample", "verify_conditions", "measure_orbit_errors"]
