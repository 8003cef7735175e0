"""Prune-and-compress for weighted tree ensembles with faithfulness control."""

from .discretize import DiscreteDomain, build_domain, encode, representative, scale
from .driver import CompressionReport, PaceConfig, certify_global, run_pace
from .ensemble import (Leaf, Sample, Split, Tree, WeightedEnsemble, margin,
                       normalize, tree_scores, vote)
from .iforest import IsolationForest, correction, path_length, plausibility, resolve_delta

__all__ = [
    "CompressionReport", "DiscreteDomain", "IsolationForest", "Leaf",
    "PaceConfig", "Sample", "Split", "Tree", "WeightedEnsemble",
    "build_domain", "certify_global", "correction", "encode", "margin",
    "normalize", "path_length", "plausibility", "representative",
    "resolve_delta", "run_pace", "scale", "tree_scores", "vote",
]

__version__ = "0.1.0"
