"""Reduced costs and generation of improving learners.

The exact pricer enumerates the full family of one-hot stumps (plus
constant single-leaf trees) over the registered split levels; the
heuristic pricer grows a deeper one-hot tree greedily on the dual
weights. Both maximize the dual-weighted margin between the original
vote and every alternative label, so a learner improves the master
exactly when 1 minus that objective is negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import DiscreteDomain
from .ensemble import Leaf, Sample, Split, Tree, tree_scores

REDUCED_COST_TOL = 1e-6


@dataclass
class TreeFamilyConfig:
    max_depth: int = 1
    domain: DiscreteDomain | None = None


@dataclass
class PricingOutcome:
    learner: Tree | None
    reduced_cost: float
    exact: bool


def _one_hot(label: int, label_count: int) -> np.ndarray:
    scores = np.zeros(label_count)
    scores[label] = 1.0
    return scores


def reduced_cost(learner: Tree, duals: dict[tuple[int, int], float],
                 samples: list[Sample], y_orig: list[int]) -> float:
    """1 - sum over rows of mu * (score[y_orig] - score[rival])."""
    total = 0.0
    for (sample_idx, rival), mu in duals.items():
        scores = tree_scores(learner, samples[sample_idx])
        total += mu * (scores[y_orig[sample_idx]] - scores[rival])
    return 1.0 - total


def _gains(duals: dict[tuple[int, int], float], samples: list[Sample],
           y_orig: list[int], label_count: int):
    """Per sample: gain[x][label] of a one-hot leaf covering x with that label.

    A leaf labeled like the original vote earns the sample's total dual
    mass; any other label loses the dual of that (sample, label) row.
    """
    mu_by_sample = np.zeros((len(samples), label_count))
    for (sample_idx, rival), mu in duals.items():
        mu_by_sample[sample_idx, rival] = mu
    gain = -mu_by_sample.copy()
    totals = mu_by_sample.sum(axis=1)
    for idx, y_o in enumerate(y_orig):
        gain[idx, y_o] = totals[idx]
    return gain


def price_exact_stumps(duals: dict[tuple[int, int], float], samples: list[Sample],
                       y_orig: list[int], domain: DiscreteDomain,
                       label_count: int) -> PricingOutcome:
    """Enumerate every stump (feature, level, left/right label) and constant tree.

    Deterministic tie-break: constant trees first, then lowest feature,
    lowest level, lowest labels.
    """
    gain = _gains(duals, samples, y_orig, label_count)
    n_samples = len(samples)

    best_obj = -np.inf
    best_tree = None
    # constant single-leaf trees
    for label in range(label_count):
        obj = float(gain[:, label].sum()) if n_samples else 0.0
        if obj > best_obj + 1e-15:
            best_obj = obj
            best_tree = Tree(Leaf(scores=_one_hot(label, label_count)))
    # stumps over registered levels
    raw = np.array([s.raw for s in samples]) if n_samples else np.zeros((0, domain.n_features))
    for feature in range(domain.n_features):
        for level in domain.levels[feature]:
            left_mask = raw[:, feature] <= level if n_samples else np.zeros(0, bool)
            left_gain = gain[left_mask].sum(axis=0) if n_samples else np.zeros(label_count)
            right_gain = gain[~left_mask].sum(axis=0) if n_samples else np.zeros(label_count)
            left_label = int(np.argmax(left_gain))
            right_label = int(np.argmax(right_gain))
            obj = float(left_gain[left_label] + right_gain[right_label])
            if obj > best_obj + 1e-15:
                best_obj = obj
                best_tree = Tree(Split(
                    feature=feature,
                    threshold=float(level),
                    left=Leaf(scores=_one_hot(left_label, label_count), depth=1),
                    right=Leaf(scores=_one_hot(right_label, label_count), depth=1),
                ))
    if best_tree is None:
        return PricingOutcome(None, 1.0, exact=True)
    return PricingOutcome(best_tree, 1.0 - best_obj, exact=True)


def _grow_greedy(indices: np.ndarray, raw: np.ndarray, gain: np.ndarray,
                 domain: DiscreteDomain, depth: int, max_depth: int,
                 label_count: int):
    region_gain = gain[indices].sum(axis=0) if len(indices) else np.zeros(label_count)
    best_label = int(np.argmax(region_gain))
    leaf = Leaf(scores=_one_hot(best_label, label_count), depth=depth)
    if depth >= max_depth or len(indices) == 0:
        return leaf
    base = float(region_gain[best_label])
    best = None  # (gain_delta, feature, level, left_idx, right_idx)
    for feature in range(domain.n_features):
        values = raw[indices, feature]
        for level in domain.levels[feature]:
            mask = values <= level
            if mask.all() or not mask.any():
                continue
            left_idx = indices[mask]
            right_idx = indices[~mask]
            split_value = float(gain[left_idx].sum(axis=0).max()
                                + gain[right_idx].sum(axis=0).max())
            if best is None or split_value > best[0] + 1e-15:
                best = (split_value, feature, level, left_idx, right_idx)
    if best is None or best[0] <= base + 1e-12:
        return leaf
    _, feature, level, left_idx, right_idx = best
    return Split(
        feature=feature,
        threshold=float(level),
        left=_grow_greedy(left_idx, raw, gain, domain, depth + 1, max_depth, label_count),
        right=_grow_greedy(right_idx, raw, gain, domain, depth + 1, max_depth, label_count),
    )


def price_heuristic(duals: dict[tuple[int, int], float], samples: list[Sample],
                    y_orig: list[int], config: TreeFamilyConfig,
                    label_count: int) -> PricingOutcome:
    """CART-style greedy tree on the dual weights; reduced cost is exact, the
    minimization over the family is not."""
    if config.max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    domain = config.domain
    gain = _gains(duals, samples, y_orig, label_count)
    raw = np.array([s.raw for s in samples]) if samples else np.zeros((0, domain.n_features))
    root = _grow_greedy(np.arange(len(samples)), raw, gain, domain, 0,
                        config.max_depth, label_count)
    tree = Tree(root)
    return PricingOutcome(tree, reduced_cost(tree, duals, samples, y_orig),
                          exact=False)


def is_improving(outcome: PricingOutcome, tol: float = REDUCED_COST_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return outcome.learner is not None and outcome.reduced_cost < -tol


def trees_identical(a: Tree, b: Tree) -> bool:
    def eq(x, y):
        if isinstance(x, Leaf) and isinstance(y, Leaf):
            return np.array_equal(x.scores, y.scores)
        if isinstance(x, Split) and isinstance(y, Split):
            return (x.feature == y.feature and x.threshold == y.threshold
                    and eq(x.left, y.left) and eq(x.right, y.right))
        return False
    return eq(a.root, b.root)
