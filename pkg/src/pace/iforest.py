"""Isolation forest training, corrected path lengths, and plausibility scores."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import Leaf, Sample, Split, Tree
from .errors import DegenerateModelError, ModelMalformedError

EULER_GAMMA = 0.5772156649015329

DEFAULT_N_TREES = 100
DEFAULT_S_MAX = 256


def correction(s: int) -> float:
    """Expected extra path length needed to isolate a point among s samples."""
    if s <= 1:
        return 0.0
    if s == 2:
        return 1.0
    return 2.0 * (math.log(s - 1) + EULER_GAMMA) - 2.0 * (s - 1) / s


@dataclass
class IsolationForest:
    trees: list[Tree]
    s_max: int

    @property
    def c_max(self) -> float:
        return correction(self.s_max)


def path_length(tree: Tree, sample: Sample) -> float:
    """Corrected path length: leaf depth plus correction(leaf support)."""
    leaf = tree.route(sample.raw)
    if leaf.support < 0:
        raise ModelMalformedError("isolation leaf missing a support annotation")
    return leaf.depth + correction(leaf.support)


def plausibility(forest: IsolationForest, sample: Sample) -> float:
    if not forest.trees:
        raise DegenerateModelError("plausibility of an empty forest")
    return sum(path_length(tree, sample) for tree in forest.trees)


def _snap(value: float, levels) -> float:
    if levels is None or len(levels) == 0:
        return value
    levels = np.asarray(levels)
    return float(levels[np.argmin(np.abs(levels - value))])


def _grow(data: np.ndarray, depth: int, depth_cap: int, rng: np.random.Generator,
          levels_by_feature) -> "Split | Leaf":
    n_samples, n_features = data.shape
    if n_samples <= 1 or depth >= depth_cap:
        return Leaf(scores=np.zeros(0), depth=depth, support=n_samples)
    spread = data.max(axis=0) - data.min(axis=0)
    usable = np.flatnonzero(spread > 0)
    if len(usable) == 0:
        return Leaf(scores=np.zeros(0), depth=depth, support=n_samples)
    feature = int(rng.choice(usable))
    lo, hi = data[:, feature].min(), data[:, feature].max()
    threshold = float(rng.uniform(lo, hi))
    if levels_by_feature is not None:
        threshold = _snap(threshold, levels_by_feature.get(feature))
    mask = data[:, feature] <= threshold
    if mask.all() or not mask.any():
        # snapped threshold fell outside the subsample spread; isolate nothing here
        return Leaf(scores=np.zeros(0), depth=depth, support=n_samples)
    return Split(
        feature=feature,
        threshold=threshold,
        left=_grow(data[mask], depth + 1, depth_cap, rng, levels_by_feature),
        right=_grow(data[~mask], depth + 1, depth_cap, rng, levels_by_feature),
    )


def train(data: np.ndarray, n_trees: int = DEFAULT_N_TREES, s_max: int = DEFAULT_S_MAX,
          seed: int = 0, levels_by_feature: dict[int, list[float]] | None = None
          ) -> IsolationForest:
    """Fit an isolation forest on subsamples of size min(s_max, len(data)).

    When levels_by_feature is given, split thresholds are snapped to the
    nearest registered level so the discretization universe stays closed.
    """
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise ValueError("cannot train an isolation forest on empty data")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    rng = np.random.default_rng(seed)
    size = min(s_max, len(data))
    depth_cap = max(1, math.ceil(math.log2(max(2, size))))
    trees = []
    for _ in range(n_trees):
        idx = rng.choice(len(data), size=size, replace=False)
        trees.append(Tree(_grow(data[idx], 0, depth_cap, rng, levels_by_feature)))
    return IsolationForest(trees=trees, s_max=s_max)


@dataclass(frozen=True)
class PlausibilityThreshold:
    delta_raw: float
    provenance: str  # "raw", "scaled", or "fraction"


def resolve_delta(kind: str, value: float, forest: IsolationForest | None = None,
                  train_scores: np.ndarray | None = None) -> PlausibilityThreshold:
    """Turn one of the three delta conventions into a raw threshold.

    raw: passed through; scaled: delta = -c(s_max) * log2(value);
    fraction: empirical value-quantile of the training plausibility scores.
    """
    if kind == "raw":
        if value < 0:
            raise ValueError("raw delta must be nonnegative")
        return PlausibilityThreshold(float(value), "raw")
    if kind == "scaled":
        if not 0 < value <= 1:
            raise ValueError(
                "scaled delta must lie in (0, 1]; 0 would exclude every sample"
            )
        if forest is None:
            raise ValueError("scaled delta needs the forest for c(s_max)")
        return PlausibilityThreshold(-forest.c_max * math.log2(value), "scaled")
    if kind == "fraction":
        if not 0 <= value <= 1:
            raise ValueError("fraction delta must lie in [0, 1]")
        if value == 0:
            return PlausibilityThreshold(0.0, "fraction")
        if train_scores is None or len(train_scores) == 0:
            raise ValueError("fraction delta needs training plausibility scores")
        scores = np.sort(np.asarray(train_scores, dtype=float))
        k = math.floor(value * len(scores))
        if k >= len(scores):
            # every training sample is an outlier: threshold just above the max
            return PlausibilityThreshold(float(np.nextafter(scores[-1], np.inf)),
                                         "fraction")
        return PlausibilityThreshold(float(scores[k]), "fraction")
    raise ValueError(f"unknown delta convention {kind!r}")
